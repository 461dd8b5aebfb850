#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pgd/calculus.hpp"
#include "pgd/errors.hpp"
#include "pgd/metrics.hpp"
#include "pgd/model.hpp"
#include "pgd/rng.hpp"

using namespace pgd;

namespace {

PointCloud cloud_1d(std::initializer_list<double> xs) {
    PointCloud c(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (const double x : xs) c(i++, 0) = x;
    return c;
}

PointCloud random_cloud(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    SequenceRng rng(seed);
    PointCloud c(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) c(i, j) = rng.uniform(-2.0, 2.0);
    return c;
}

PointCloud gaussian_cloud(const GaussianMeasure& g, Eigen::Index n, std::uint64_t seed) {
    PointCloud c(n, g.dim());
    for (Eigen::Index i = 0; i < n; ++i)
        c.row(i) = g.sample(seed, static_cast<std::uint32_t>(i)).transpose();
    return c;
}

} // namespace

TEST_CASE("empirical W2 basics") {
    const PointCloud a = cloud_1d({0.0, 1.0});
    CHECK(w2_empirical(a, a) == 0.0);
    CHECK(w2_empirical(a, cloud_1d({1.0, 2.0})) == doctest::Approx(1.0).epsilon(1e-15));
    // multiset equality regardless of order
    CHECK(w2_empirical(cloud_1d({3.0, -1.0, 0.0}), cloud_1d({0.0, 3.0, -1.0})) == 0.0);
}

TEST_CASE("assignment solver equals exhaustive permutation search") {
    for (int trial = 0; trial < 100; ++trial) {
        const PointCloud a = random_cloud(6, 2, 100 + static_cast<std::uint64_t>(trial));
        const PointCloud b = random_cloud(6, 2, 900 + static_cast<std::uint64_t>(trial));
        CHECK(w2_empirical(a, b) == oracles::brute_force_w2(a, b));
    }
}

TEST_CASE("1-d sorted pairing agrees with the assignment path") {
    for (int trial = 0; trial < 20; ++trial) {
        const PointCloud a = random_cloud(7, 1, 40 + static_cast<std::uint64_t>(trial));
        const PointCloud b = random_cloud(7, 1, 70 + static_cast<std::uint64_t>(trial));
        // route the same data through the generic solver by lifting to 2-d
        PointCloud a2(7, 2), b2(7, 2);
        a2.col(0) = a.col(0);
        a2.col(1).setZero();
        b2.col(0) = b.col(0);
        b2.col(1).setZero();
        CHECK(w2_empirical(a, b) == doctest::Approx(w2_empirical(a2, b2)).epsilon(1e-14));
        CHECK(w2_empirical(a, b) == doctest::Approx(oracles::brute_force_w2(a, b)).epsilon(1e-14));
    }
}

TEST_CASE("empirical W2 metric axioms") {
    for (int trial = 0; trial < 25; ++trial) {
        const auto seed = static_cast<std::uint64_t>(trial);
        const PointCloud a = random_cloud(16, 3, 1 + seed);
        const PointCloud b = random_cloud(16, 3, 2 + seed * 7);
        const PointCloud c = random_cloud(16, 3, 3 + seed * 13);
        const double ab = w2_empirical(a, b);
        const double ba = w2_empirical(b, a);
        const double ac = w2_empirical(a, c);
        const double cb = w2_empirical(c, b);
        CHECK(std::fabs(ab - ba) <= 1e-10);
        CHECK(ab <= ac + cb + 1e-10);
    }
}

TEST_CASE("empirical W2 input validation") {
    const PointCloud a = random_cloud(4, 2, 1);
    CHECK_THROWS_AS(w2_empirical(a, random_cloud(5, 2, 2)), Error);
    CHECK_THROWS_AS(w2_empirical(a, random_cloud(4, 3, 2)), Error);
    // cap applies to the assignment path only; reject before building the
    // quadratic cost matrix
    const PointCloud big_a = PointCloud::Zero(5000, 2);
    const PointCloud big_b = PointCloud::Zero(5000, 2);
    CHECK_THROWS_AS(w2_empirical(big_a, big_b), Error);
    // 1-d sorted pairing handles the same size fine
    const PointCloud wide_a = PointCloud::Zero(5000, 1);
    const PointCloud wide_b = PointCloud::Ones(5000, 1);
    CHECK(w2_empirical(wide_a, wide_b) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("empirical W2 between Gaussian samples approaches the Bures value") {
    const GaussianMeasure ga(Vec::Zero(2), Mat::Identity(2, 2));
    Mat cov_b(2, 2);
    cov_b << 2.0, 0.5, 0.5, 1.5;
    Vec mean_b(2);
    mean_b << 1.0, -0.5;
    const GaussianMeasure gb(mean_b, cov_b);
    const double exact = w2_gaussian(ga, gb);

    double prev_mad = 1e300;
    for (const Eigen::Index n : {64, 256, 1024}) {
        std::vector<double> devs;
        for (int rep = 0; rep < 3; ++rep) {
            const auto seed = static_cast<std::uint64_t>(1000 * rep + n);
            const PointCloud a = gaussian_cloud(ga, n, seed);
            const PointCloud b = gaussian_cloud(gb, n, seed + 555);
            devs.push_back(std::fabs(w2_empirical(a, b) - exact));
        }
        std::sort(devs.begin(), devs.end());
        const double mad = devs[1];
        CHECK(mad < prev_mad + 0.05); // non-increasing up to sampling noise
        prev_mad = mad;
    }
    CHECK(prev_mad < 0.2);
}

TEST_CASE("cloud-to-Gaussian quantile distance") {
    // single point at the mean: W2^2 = E[Z^2] = variance
    CHECK(w2_cloud_to_gaussian_1d(cloud_1d({0.0}), 0.0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-8));
    // two symmetric points vs a collapsing Gaussian
    CHECK(w2_cloud_to_gaussian_1d(cloud_1d({-1.0, 1.0}), 0.0, 1e-8) ==
          doctest::Approx(1.0).epsilon(1e-6));

    // agrees with the exact partial-moment form
    for (int trial = 0; trial < 10; ++trial) {
        const PointCloud c = random_cloud(50, 1, 300 + static_cast<std::uint64_t>(trial));
        const double got = w2_cloud_to_gaussian_1d(c, 0.3, 1.7);
        const double want = oracles::closed_form_cloud_gaussian_w2(c, 0.3, 1.7);
        CHECK(got == doctest::Approx(want).epsilon(1e-7));
    }

    // sampling decay: larger i.i.d. clouds sit closer to their law
    const GaussianMeasure g(Vec::Zero(1), Mat::Identity(1, 1));
    double prev = 1e300;
    for (const Eigen::Index n : {1000, 10000, 100000}) {
        const PointCloud c = gaussian_cloud(g, n, 77);
        const double w = w2_cloud_to_gaussian_1d(c, 0.0, 1.0);
        CHECK(w < prev);
        prev = w;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("slope fits") {
    const std::vector<double> xs = {1.0, 2.0, 4.0, 8.0, 16.0};
    std::vector<double> ys = xs;
    auto fit = loglog_slope(xs, ys);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = std::sqrt(xs[i]);
    fit = loglog_slope(xs, ys);
    CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));

    SequenceRng rng(12);
    for (std::size_t i = 0; i < xs.size(); ++i)
        ys[i] = 3.0 * std::sqrt(xs[i]) * (1.0 + 0.01 * rng.uniform(-1.0, 1.0));
    fit = loglog_slope(xs, ys);
    CHECK(fit.slope >= 0.45);
    CHECK(fit.slope <= 0.55);

    CHECK_THROWS_AS(loglog_slope({1.0, 2.0}, {1.0, 2.0}), Error);
    CHECK_THROWS_AS(loglog_slope({1.0, 2.0, -3.0}, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("exponential rate fits") {
    const std::vector<double> ts = {0.0, 0.5, 1.0, 1.5, 2.0};
    std::vector<double> ys(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) ys[i] = std::exp(-2.0 * ts[i]);
    auto fit = exp_rate_fit(ts, ys);
    CHECK(-fit.slope == doctest::Approx(2.0).epsilon(1e-12));

    std::fill(ys.begin(), ys.end(), 0.7);
    fit = exp_rate_fit(ts, ys);
    CHECK(fit.slope == doctest::Approx(0.0));

    // flow distances decay at rate >= 0.99 lambda
    const QuadraticModel toy = models::toy_1d(1.0);
    const double lambda = toy.concavity_constants().lambda;
    Vec t0(1);
    t0 << 0.0;
    const GaussianMeasure q0(t0, Mat::Identity(1, 1));
    const auto traj = integrate_flow(toy, {t0, q0, 0.0}, 10.0 / lambda, 1e-3, 200);
    const auto [ts_opt, pi_star] = toy.analytic_optimum();
    std::vector<double> times, dists;
    for (const auto& s : traj) {
        times.push_back(s.t);
        dists.push_back(d_metric(s.theta, s.q, ts_opt, pi_star));
    }
    fit = exp_rate_fit(times, dists);
    CHECK(-fit.slope >= 0.99 * lambda);
}

TEST_CASE("d_random_estimate trends") {
    const QuadraticModel toy = models::toy_1d(1.0);

    RunConfig cfg;
    cfg.h = 0.02;
    cfg.n_particles = 128;
    cfg.seed = 2000;
    // start away from the optimum so the flow term dominates the decay
    GaussianInit far;
    far.theta0 = Vec::Constant(1, -1.0);
    far.q0 = GaussianMeasure(Vec::Constant(1, -1.0), Mat::Identity(1, 1));
    cfg.init = far;

    double prev = 1e300;
    for (const long k : {10L, 100L, 1000L}) {
        cfg.k_steps = k;
        const auto est = d_random_estimate(cfg, toy, 50, 2);
        CHECK(est.estimate <= prev + 2.0 * est.std_error); // non-increasing trend
        prev = est.estimate;
        CHECK(est.estimate >= 0.0);
        CHECK(est.std_error >= 0.0);
    }

    // quadrupling the replicates roughly halves the standard error
    cfg.k_steps = 200;
    const auto a = d_random_estimate(cfg, toy, 40, 2);
    const auto b = d_random_estimate(cfg, toy, 160, 2);
    CHECK(a.std_error / b.std_error > 1.4);
    CHECK(a.std_error / b.std_error < 3.0);

    // replicate count below two is rejected
    CHECK_THROWS_AS(d_random_estimate(cfg, toy, 1, 1), Error);

    // worker count must not change the estimate
    const auto serial = d_random_estimate(cfg, toy, 8, 1);
    const auto threaded = d_random_estimate(cfg, toy, 8, 4);
    CHECK(serial.estimate == threaded.estimate);
    CHECK(serial.std_error == threaded.std_error);
}

TEST_CASE("analytic_optimum_of dispatch") {
    const QuadraticModel toy = models::toy_1d(1.0);
    CHECK(analytic_optimum_of(toy).first(0) == doctest::Approx(1.0));
    Mat design(2, 1);
    design << 1.0, -1.0;
    Vec labels(2);
    labels << 1.0, 0.0;
    const LogisticModel logi(design, labels, 1.0, 1.0);
    CHECK_THROWS_AS(analytic_optimum_of(logi), Error);
}
