#include "pgd/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "pgd/errors.hpp"

namespace pgd {

GaussianMeasure::GaussianMeasure(Vec m, Mat c) : mean(std::move(m)), cov(std::move(c)) {
    if (cov.rows() != mean.size() || cov.cols() != mean.size())
        throw_config("GaussianMeasure: covariance shape does not match mean");
    if (!cov.isApprox(cov.transpose(), 1e-10))
        throw_degenerate("GaussianMeasure: covariance not symmetric");
    ensure_chol();
}

void GaussianMeasure::ensure_chol() const {
    if (has_chol_) return;
    Eigen::LLT<Mat> llt(0.5 * (cov + cov.transpose()));
    if (llt.info() != Eigen::Success)
        throw_degenerate("GaussianMeasure: covariance not positive definite");
    chol_ = llt.matrixL();
    has_chol_ = true;
}

const Mat& GaussianMeasure::chol_lower() const {
    ensure_chol();
    return chol_;
}

double GaussianMeasure::log_det_cov() const {
    ensure_chol();
    double s = 0.0;
    for (Eigen::Index i = 0; i < chol_.rows(); ++i) s += std::log(chol_(i, i));
    return 2.0 * s;
}

double GaussianMeasure::log_pdf(const Vec& x) const {
    ensure_chol();
    const Vec d = x - mean;
    const Vec w = chol_.triangularView<Eigen::Lower>().solve(d);
    return -0.5 * w.squaredNorm() - 0.5 * log_det_cov() -
           0.5 * static_cast<double>(dim()) * std::log(2.0 * std::numbers::pi);
}

Vec GaussianMeasure::grad_log_pdf(const Vec& x) const {
    ensure_chol();
    const Vec d = x - mean;
    Vec w = chol_.triangularView<Eigen::Lower>().solve(d);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(w);
    return -w;
}

Vec GaussianMeasure::sample(std::uint64_t seed, std::uint32_t unit, rng::Stream stream) const {
    ensure_chol();
    Vec z(dim());
    for (Eigen::Index i = 0; i < dim(); ++i)
        z(i) = rng::normal(seed, 0, unit, static_cast<std::uint32_t>(i), stream);
    return mean + chol_ * z;
}

} // namespace pgd
