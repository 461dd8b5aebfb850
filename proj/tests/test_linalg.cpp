#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "pgd/errors.hpp"
#include "pgd/linalg.hpp"
#include "pgd/rng.hpp"

using namespace pgd;

namespace {
Mat random_symmetric(Eigen::Index n, std::uint64_t seed) {
    SequenceRng r(seed);
    Mat a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = r.uniform(-1.0, 1.0);
    return Mat(0.5 * (a + a.transpose()));
}
} // namespace

TEST_CASE("jacobi eigenvalues match the closed form for the toy Hessian") {
    Mat m(2, 2);
    m << 1.0, -1.0, -1.0, 2.0;
    const auto eig = linalg::jacobi_eigen(m);
    const double lo = (3.0 - std::sqrt(5.0)) / 2.0;
    const double hi = (3.0 + std::sqrt(5.0)) / 2.0;
    CHECK(eig.values(0) == doctest::Approx(lo).epsilon(1e-14));
    CHECK(eig.values(1) == doctest::Approx(hi).epsilon(1e-14));
}

TEST_CASE("jacobi reconstructs random symmetric matrices") {
    for (const Eigen::Index n : {2, 5, 17, 40}) {
        const Mat a = random_symmetric(n, 100 + static_cast<std::uint64_t>(n));
        const auto eig = linalg::jacobi_eigen(a);
        const Mat rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
        CHECK((rebuilt - a).norm() <= 1e-11 * std::max(1.0, a.norm()));
        CHECK((eig.vectors.transpose() * eig.vectors - Mat::Identity(n, n)).norm() < 1e-11);
        // independent check against Eigen's solver
        Eigen::SelfAdjointEigenSolver<Mat> ref(a);
        CHECK((eig.values - ref.eigenvalues()).norm() < 1e-10);
        for (Eigen::Index i = 1; i < n; ++i) CHECK(eig.values(i - 1) <= eig.values(i));
    }
}

TEST_CASE("sqrt_spd squares back") {
    const Mat a = random_symmetric(6, 7);
    const Mat spd = a * a.transpose() + 0.5 * Mat::Identity(6, 6);
    const Mat r = linalg::sqrt_spd(spd);
    CHECK((r * r - spd).norm() < 1e-10);
    CHECK(r.isApprox(r.transpose(), 1e-12));
}

TEST_CASE("sqrt_spd rejects indefinite input") {
    Mat m(2, 2);
    m << 1.0, 0.0, 0.0, -0.5;
    CHECK_THROWS_AS(linalg::sqrt_spd(m), Error);
}

TEST_CASE("jacobi requires symmetry") {
    Mat m(2, 2);
    m << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(linalg::jacobi_eigen(m), Error);
}
