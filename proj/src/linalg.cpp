#include "pgd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pgd/errors.hpp"

namespace pgd {
namespace linalg {

namespace {

double offdiag_norm(const Mat& a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

} // namespace

SymmetricEigen jacobi_eigen(const Mat& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw_config("jacobi_eigen: matrix must be square");
    if (!a.isApprox(a.transpose(), 1e-12)) throw_config("jacobi_eigen: matrix must be symmetric");

    Mat d = 0.5 * (a + a.transpose());
    Mat v = Mat::Identity(n, n);
    const double scale = std::max(1.0, d.norm());
    const double tol = 1e-12 * scale;

    for (int sweep = 0; sweep < 100 && offdiag_norm(d) > tol; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = d(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                const double theta = (d(q, q) - d(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (Eigen::Index k = 0; k < n; ++k) {
                    const double dkp = d(k, p);
                    const double dkq = d(k, q);
                    d(k, p) = c * dkp - s * dkq;
                    d(k, q) = s * dkp + c * dkq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double dpk = d(p, k);
                    const double dqk = d(q, k);
                    d(p, k) = c * dpk - s * dqk;
                    d(q, k) = s * dpk + c * dqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEigen out;
    out.values = d.diagonal();
    out.vectors = v;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index i, Eigen::Index j) { return out.values(i) < out.values(j); });
    Vec sorted_vals(n);
    Mat sorted_vecs(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        sorted_vals(i) = out.values(order[static_cast<std::size_t>(i)]);
        sorted_vecs.col(i) = out.vectors.col(order[static_cast<std::size_t>(i)]);
    }
    out.values = sorted_vals;
    out.vectors = sorted_vecs;
    return out;
}

Mat sqrt_spd(const Mat& a) {
    const auto eig = jacobi_eigen(a);
    const double scale = std::max(1.0, std::fabs(eig.values(eig.values.size() - 1)));
    Vec roots(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) < -1e-10 * scale)
            throw_degenerate("sqrt_spd: matrix has a negative eigenvalue");
        roots(i) = std::sqrt(std::max(0.0, eig.values(i)));
    }
    return eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
}

bool is_spd(const Mat& a) {
    if (a.rows() != a.cols()) return false;
    if (!a.isApprox(a.transpose(), 1e-10)) return false;
    Eigen::LLT<Mat> llt(0.5 * (a + a.transpose()));
    return llt.info() == Eigen::Success;
}

} // namespace linalg
} // namespace pgd
