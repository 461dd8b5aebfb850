#ifndef PGD_LINALG_HPP
#define PGD_LINALG_HPP

#include <Eigen/Dense>

namespace pgd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace linalg {

struct SymmetricEigen {
    Vec values;   // ascending
    Mat vectors;  // columns, orthonormal
};

// Cyclic Jacobi rotations for symmetric matrices. Sweeps until the
// off-diagonal Frobenius norm drops below 1e-12 relative to the matrix norm.
// All matrices in this project are small (dim <= ~200), where Jacobi is both
// simple and fully accurate.
SymmetricEigen jacobi_eigen(const Mat& a);

// Symmetric positive semi-definite square root via jacobi_eigen. Eigenvalues
// below -tol * norm are treated as a degenerate input.
Mat sqrt_spd(const Mat& a);

bool is_spd(const Mat& a);

} // namespace linalg
} // namespace pgd

#endif
