#ifndef PGD_GAUSSIAN_HPP
#define PGD_GAUSSIAN_HPP

#include "pgd/linalg.hpp"
#include "pgd/rng.hpp"

namespace pgd {

// Gaussian measure on R^d: the carrier for every closed-form computation in
// the calculus layer. The covariance must be symmetric positive definite.
struct GaussianMeasure {
    Vec mean;
    Mat cov;

    GaussianMeasure() = default;
    GaussianMeasure(Vec m, Mat c);

    Eigen::Index dim() const { return mean.size(); }

    // log density at x
    double log_pdf(const Vec& x) const;
    // gradient of the log density at x: -cov^{-1} (x - mean)
    Vec grad_log_pdf(const Vec& x) const;

    // One draw per (unit, coord) key; pure in (seed, unit).
    Vec sample(std::uint64_t seed, std::uint32_t unit,
               rng::Stream stream = rng::Stream::Generic) const;

    const Mat& chol_lower() const;    // cached Cholesky factor L, cov = L L^T
    double log_det_cov() const;

private:
    mutable Mat chol_;       // lazily computed
    mutable bool has_chol_ = false;
    void ensure_chol() const;
};

} // namespace pgd

#endif
