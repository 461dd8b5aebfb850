#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pgd/calculus.hpp"
#include "pgd/errors.hpp"
#include "pgd/model.hpp"
#include "pgd/rng.hpp"

using namespace pgd;

namespace {

Vec vec1(double a) {
    Vec v(1);
    v << a;
    return v;
}

GaussianMeasure g1(double mean, double var) {
    return GaussianMeasure(vec1(mean), Mat::Constant(1, 1, var));
}

const double kLambdaToy = (3.0 - std::sqrt(5.0)) / 2.0;

} // namespace

TEST_CASE("free energy of the toy at and around the optimum") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const auto [theta_star, pi_star] = toy.analytic_optimum();

    // F_* = -log Z_* with Z_theta the N(theta, 2) density at y
    const double f_star = free_energy(toy, theta_star, pi_star);
    CHECK(f_star == doctest::Approx(0.5 * std::log(4.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(optimal_free_energy(toy) == doctest::Approx(f_star).epsilon(1e-12));

    // independent quadrature of the defining integral
    CHECK(oracles::quad_free_energy_1d(toy, theta_star, pi_star) ==
          doctest::Approx(f_star).epsilon(1e-8));

    // F(theta, pi_theta) - F_* = (y - theta)^2 / 4
    for (const double th : {-1.0, 0.0, 0.5, 2.0}) {
        const GaussianMeasure pi_th = toy.posterior(vec1(th));
        const double gap = free_energy(toy, vec1(th), pi_th) - f_star;
        CHECK(gap == doctest::Approx((1.0 - th) * (1.0 - th) / 4.0).epsilon(1e-10));
        CHECK(oracles::quad_free_energy_1d(toy, vec1(th), pi_th) ==
              doctest::Approx(free_energy(toy, vec1(th), pi_th)).epsilon(1e-8));
    }

    // F >= F_* everywhere
    const auto states = gaussian_state_sweep(1, 1, 50, 42);
    for (const auto& [theta, q] : states)
        CHECK(free_energy(toy, theta, q) >= f_star - 1e-12);
}

TEST_CASE("free energy and fisher info match Monte Carlo on random states") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const auto states = gaussian_state_sweep(1, 1, 5, 7);
    for (std::size_t s = 0; s < states.size(); ++s) {
        const auto& [theta, q] = states[s];
        const auto mc_f = oracles::mc_free_energy(toy, theta, q, 100000, 1000 + s);
        CHECK(std::fabs(free_energy(toy, theta, q) - mc_f.value) <= 4.0 * mc_f.std_error);
        const auto mc_i = oracles::mc_fisher_info(toy, theta, q, 100000, 2000 + s);
        CHECK(std::fabs(fisher_info(toy, theta, q) - mc_i.value) <= 4.0 * mc_i.std_error);
    }
}

TEST_CASE("fisher info closed forms") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const auto [theta_star, pi_star] = toy.analytic_optimum();
    CHECK(fisher_info(toy, theta_star, pi_star) <= 1e-12);

    // I(theta, pi_theta) = |d/dtheta log Z_theta|^2 = (y - theta)^2 / 4
    for (const double th : {-1.0, 0.3, 2.0}) {
        const GaussianMeasure pi_th = toy.posterior(vec1(th));
        CHECK(fisher_info(toy, vec1(th), pi_th) ==
              doctest::Approx((1.0 - th) * (1.0 - th) / 4.0).epsilon(1e-10));
        CHECK(oracles::quad_fisher_info_1d(toy, vec1(th), pi_th) ==
              doctest::Approx(fisher_info(toy, vec1(th), pi_th)).epsilon(1e-7));
    }

    // generic state against quadrature
    const GaussianMeasure q = g1(-0.7, 2.3);
    CHECK(oracles::quad_fisher_info_1d(toy, vec1(0.4), q) ==
          doctest::Approx(fisher_info(toy, vec1(0.4), q)).epsilon(1e-8));
    CHECK(fisher_info(toy, vec1(0.4), q) >= 0.0);
}

TEST_CASE("Bures distance closed form") {
    const GaussianMeasure a = g1(0.0, 1.0);
    CHECK(w2_gaussian(a, a) == 0.0);
    CHECK(w2_gaussian(a, g1(1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));

    const GaussianMeasure i2(Vec::Zero(2), Mat::Identity(2, 2));
    const GaussianMeasure i2x4(Vec::Zero(2), 4.0 * Mat::Identity(2, 2));
    CHECK(w2_gaussian(i2, i2x4) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // 1-d closed form |sigma_a - sigma_b| for equal means
    CHECK(w2_gaussian(g1(0.0, 4.0), g1(0.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("w2 and d satisfy metric axioms on random triples") {
    SequenceRng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto states = gaussian_state_sweep(2, 3, 3, 5000 + static_cast<std::uint64_t>(trial));
        const auto& [ta, qa] = states[0];
        const auto& [tb, qb] = states[1];
        const auto& [tc, qc] = states[2];
        const double ab = w2_gaussian(qa, qb);
        const double ba = w2_gaussian(qb, qa);
        const double ac = w2_gaussian(qa, qc);
        const double cb = w2_gaussian(qc, qb);
        CHECK(std::fabs(ab - ba) <= 1e-10);
        CHECK(ab <= ac + cb + 1e-10);
        CHECK(w2_gaussian(qa, qa) <= 1e-10);

        const double dab = d_metric(ta, qa, tb, qb);
        const double dac = d_metric(ta, qa, tc, qc);
        const double dcb = d_metric(tc, qc, tb, qb);
        CHECK(dab <= dac + dcb + 1e-10);
        CHECK(d_metric(ta, qa, ta, qa) <= 1e-10);
        CHECK(dab == doctest::Approx(d_metric(tb, qb, ta, qa)).epsilon(1e-12));
    }
}

TEST_CASE("d_metric composes Euclidean and Wasserstein parts") {
    const GaussianMeasure q = g1(0.0, 1.0);
    CHECK(d_metric(vec1(0.0), q, vec1(3.0), q) == doctest::Approx(3.0).epsilon(1e-12));
    // theta shift 3, mean shift 4, equal covariances: 3-4-5 triangle
    CHECK(d_metric(vec1(0.0), q, vec1(3.0), g1(4.0, 1.0)) ==
          doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("flow RHS closed forms") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const auto [theta_star, pi_star] = toy.analytic_optimum();

    const FlowState at_opt{theta_star, pi_star, 0.0};
    const FlowDeriv d0 = flow_rhs(toy, at_opt);
    CHECK(d0.dtheta.norm() <= 1e-12);
    CHECK(d0.dmean.norm() <= 1e-12);
    CHECK(d0.dcov.norm() <= 1e-12);

    const FlowState s{vec1(0.0), g1(0.0, 1.0), 0.0};
    const FlowDeriv d = flow_rhs(toy, s);
    CHECK(d.dtheta(0) == doctest::Approx(0.0));
    CHECK(d.dmean(0) == doctest::Approx(1.0));
    CHECK(d.dcov(0, 0) == doctest::Approx(-2.0));

    // drift matches the Monte Carlo average of grad_theta over q
    SequenceRng rng(8);
    double acc = 0.0;
    const long n = 100000;
    for (long i = 0; i < n; ++i) {
        const Vec x = s.q.sample(33, static_cast<std::uint32_t>(i));
        acc += toy.grad_theta(s.theta, x)(0);
    }
    const double se = 1.0 / std::sqrt(static_cast<double>(n)); // grad std is O(1)
    CHECK(std::fabs(acc / static_cast<double>(n) - d.dtheta(0)) <= 4.0 * se);
}

TEST_CASE("integrate_flow: equilibrium, empty horizon, convergence") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const auto [theta_star, pi_star] = toy.analytic_optimum();

    const auto fixed = integrate_flow(toy, {theta_star, pi_star, 0.0}, 1.0, 0.01);
    for (const auto& s : fixed)
        CHECK(d_metric(s.theta, s.q, theta_star, pi_star) <= 1e-12);

    const auto none = integrate_flow(toy, {vec1(0.0), g1(0.0, 1.0), 0.0}, 0.0, 0.01);
    CHECK(none.size() == 1);

    // long-time limit reaches the analytic optimum
    const double lambda = toy.concavity_constants().lambda;
    const auto traj =
        integrate_flow(toy, {vec1(0.0), g1(0.0, 1.0), 0.0}, 20.0 / lambda, 1e-3, 100);
    const auto& last = traj.back();
    CHECK(d_metric(last.theta, last.q, theta_star, pi_star) <= 1e-6);
}

TEST_CASE("integrate_flow is fourth order") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const FlowState init{vec1(0.0), g1(0.0, 1.0), 0.0};
    auto endpoint = [&](double dt) {
        const auto traj = integrate_flow(toy, init, 2.0, dt, 1 << 24);
        const auto& s = traj.back();
        Vec packed(3);
        packed << s.theta(0), s.q.mean(0), s.q.cov(0, 0);
        return packed;
    };
    const Vec e1 = endpoint(0.04);
    const Vec e2 = endpoint(0.02);
    const Vec e3 = endpoint(0.01);
    const double err12 = (e1 - e2).norm();
    const double err23 = (e2 - e3).norm();
    REQUIRE(err23 > 1e-14); // above the floating-point floor
    const double order = std::log2(err12 / err23);
    CHECK(order >= 3.5);
}

TEST_CASE("de Bruijn identity holds along the flow") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const FlowState init{vec1(0.0), g1(0.0, 1.0), 0.0};

    const auto stationary = integrate_flow(toy, {toy.analytic_optimum().first,
                                                 toy.analytic_optimum().second, 0.0},
                                           0.01, 1e-3);
    for (const double r : debruijn_residual(toy, stationary)) CHECK(r <= 1e-10);

    const auto traj = integrate_flow(toy, init, 3.0, 1e-3);
    const auto res = debruijn_residual(toy, traj);
    double max_res = 0.0;
    for (const double r : res) max_res = std::max(max_res, r);
    CHECK(max_res <= 1e-4);

    const auto traj_half = integrate_flow(toy, init, 3.0, 5e-4);
    const auto res_half = debruijn_residual(toy, traj_half);
    double max_half = 0.0;
    for (const double r : res_half) max_half = std::max(max_half, r);
    CHECK(max_res / max_half >= 3.0); // second-order residual: ~4x per halving
}

TEST_CASE("xLSI ratio closed form and invariances") {
    const QuadraticModel toy = models::toy_1d(1.0);

    // On the (theta, pi_theta) slice the ratio is the constant 1/(2 lambda).
    for (const double th : {-2.0, 0.0, 0.45}) {
        const double ratio = xlsi_ratio(toy, vec1(th), toy.posterior(vec1(th)));
        CHECK(ratio == doctest::Approx(1.0 / (2.0 * kLambdaToy)).epsilon(1e-10));
    }

    // near-optimal rejection
    const auto [theta_star, pi_star] = toy.analytic_optimum();
    CHECK_THROWS_AS(xlsi_ratio(toy, theta_star, pi_star), Error);

    // invariance under recentering: shift state along with the model
    const QuadraticModel centered = toy.shift_to_origin();
    const Vec shift = toy.joint_maximizer();
    const GaussianMeasure q = g1(-0.4, 0.8);
    const GaussianMeasure q_shifted = g1(-0.4 - shift(1), 0.8);
    const double r1 = xlsi_ratio(toy, vec1(0.3), q);
    const double r2 = xlsi_ratio(centered, vec1(0.3 - shift(0)), q_shifted);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-10));
}

TEST_CASE("xT2I slack closed form on the posterior slice") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const auto [theta_star, pi_star] = toy.analytic_optimum();
    CHECK(std::fabs(xt2i_slack(toy, theta_star, pi_star)) <= 1e-12);

    // 2 (y-th)^2/4 - lambda [(th-1)^2 + ((th-1)/2)^2]
    for (const double th : {-1.5, 0.0, 2.5}) {
        const double gap = (1.0 - th) * (1.0 - th);
        const double expected = 0.5 * gap - kLambdaToy * (gap + gap / 4.0);
        CHECK(xt2i_slack(toy, vec1(th), toy.posterior(vec1(th))) ==
              doctest::Approx(expected).epsilon(1e-10));
        CHECK(expected >= 0.0);
    }
}

TEST_CASE("inequality sweeps stay non-negative on both reference models") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const QuadraticModel q3 = models::example_3d();
    for (const QuadraticModel* model : {&toy, &q3}) {
        const double log_z_star = -optimal_free_energy(*model);
        const auto states =
            gaussian_state_sweep(model->dim_theta(), model->dim_x(), 300, 2026);
        for (const auto& [theta, q] : states) {
            const double gap = free_energy(*model, theta, q) - optimal_free_energy(*model);
            if (gap >= 1e-12) CHECK(xlsi_ratio(*model, theta, q) >= 1.0 - 1e-10);
            CHECK(xt2i_slack(*model, theta, q) >= -1e-10);
            CHECK(xlsi_upper_bound_logZ(*model, theta, q) >= log_z_star - 1e-10);
        }
    }
}

TEST_CASE("scaling the log-likelihood doubles the constants, inequalities persist") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const QuadraticModel scaled(1, Mat(2.0 * toy.hessian()), Vec(2.0 * toy.linear()),
                                2.0 * toy.constant());
    const auto cc = toy.concavity_constants();
    const auto cc2 = scaled.concavity_constants();
    CHECK(cc2.lambda == doctest::Approx(2.0 * cc.lambda).epsilon(1e-12));
    CHECK(cc2.L == doctest::Approx(2.0 * cc.L).epsilon(1e-12));
    const auto states = gaussian_state_sweep(1, 1, 200, 31);
    for (const auto& [theta, q] : states) {
        const double gap = free_energy(scaled, theta, q) - optimal_free_energy(scaled);
        if (gap >= 1e-12) CHECK(xlsi_ratio(scaled, theta, q) >= 1.0 - 1e-10);
    }
}

TEST_CASE("free energy decreases strictly along the flow; moments stay bounded") {
    const QuadraticModel centered = models::toy_1d(1.0).shift_to_origin();
    const double lambda = centered.concavity_constants().lambda;
    const double f_star = optimal_free_energy(centered);
    const FlowState init{vec1(0.0), g1(0.0, 1.0), 0.0};
    const auto traj = integrate_flow(centered, init, 20.0 / lambda, 1e-3, 50);

    const double moment_bound = 2.0 * (0.0 + 1.0 + 2.0 * 1.0 / lambda);
    double prev = 1e300;
    for (const auto& s : traj) {
        const double f = free_energy(centered, s.theta, s.q);
        if (f - f_star > 1e-12) CHECK(f < prev);
        prev = f;
        const double moment =
            s.theta.squaredNorm() + s.q.mean.squaredNorm() + s.q.cov.trace();
        CHECK(moment <= moment_bound);
    }
}

TEST_CASE("contraction excess and entropic decay along the flow") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const double lambda = toy.concavity_constants().lambda;
    const FlowState init{vec1(0.0), g1(0.0, 1.0), 0.0};
    const auto traj = integrate_flow(toy, init, 10.0 / lambda, 1e-3, 20);

    const auto stationary = integrate_flow(toy, {toy.analytic_optimum().first,
                                                 toy.analytic_optimum().second, 0.0},
                                           0.05, 1e-3);
    for (const double e : contraction_excess(toy, stationary)) CHECK(std::fabs(e) <= 1e-10);

    const auto excess = contraction_excess(toy, traj);
    for (const double e : excess) CHECK(e <= 1e-8);

    // [F_t - F_*] e^{2 lambda t} <= F_0 - F_*
    const double f_star = optimal_free_energy(toy);
    const double f0_gap = free_energy(toy, init.theta, init.q) - f_star;
    for (const auto& s : traj) {
        const double gap = free_energy(toy, s.theta, s.q) - f_star;
        CHECK(gap * std::exp(2.0 * lambda * s.t) - f0_gap <= 1e-8);
    }
}

TEST_CASE("bound terms follow the explicit formulas") {
    const QuadraticModel centered = models::toy_1d(1.0).shift_to_origin();
    const auto cc = centered.concavity_constants();

    // iota = 2 L lambda / (L + lambda); for the toy L lambda = det(-H) = 1
    // and L + lambda = 3, so iota = 2/3.
    const BoundTerms bt = bound_terms(centered, 0.01, 1024, 3000, WarmStartInit{});
    CHECK(bt.iota == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(bt.B0 == 0.0);
    CHECK(bt.dx == 1.0);
    CHECK(bt.d0 == doctest::Approx(2.0 * std::sqrt(1.0 / cc.lambda)).epsilon(1e-12));

    // warm-start A_{0,h}^2 = (4h + 4/iota)/iota * 220 L^2 (2 L^2 h dx/lambda + dx)
    const double h = 0.01;
    const double a_sq = (4.0 * h + 4.0 / bt.iota) / bt.iota * 220.0 * cc.L * cc.L *
                        (2.0 * cc.L * cc.L * h * 1.0 / cc.lambda + 1.0);
    CHECK(bt.A0h == doctest::Approx(std::sqrt(a_sq)).epsilon(1e-12));
    CHECK(bt.term_discretization == doctest::Approx(std::sqrt(h) * bt.A0h).epsilon(1e-12));
    CHECK(bt.term_particles ==
          doctest::Approx(cc.L * std::sqrt(2.0) / (cc.lambda * 32.0) *
                          std::sqrt(2.0 / cc.lambda))
              .epsilon(1e-12));
    CHECK(bt.term_flow ==
          doctest::Approx(bt.d0 * std::exp(-h * cc.lambda * 3000.0)).epsilon(1e-12));

    // limits: each term vanishes in its own regime
    CHECK(bound_terms(centered, 0.01, 1024, 2000000000L, WarmStartInit{}).term_flow <= 1e-12);
    CHECK(bound_terms(centered, 0.01, 1L << 40, 3000, WarmStartInit{}).term_particles < 1e-4);
    // term_discretization ~ sqrt(h) A_{0,0} for small h, so it shrinks by
    // ~10x per two decades of h
    double prev = 1e300;
    for (const double hh : {1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
        const double term = bound_terms(centered, hh, 1024, 3000, WarmStartInit{})
                                .term_discretization;
        CHECK(term < prev);
        prev = term;
    }
    CHECK(prev <= 2e-3);

    // preconditions
    CHECK_THROWS_AS(bound_terms(centered, 0.5, 1024, 100, WarmStartInit{}), Error);
    CHECK_THROWS_AS(bound_terms(models::toy_1d(1.0), 0.01, 1024, 100, WarmStartInit{}),
                    Error); // not centered

    // gaussian init picks up B0 and the exact d0
    GaussianInit g;
    g.theta0 = vec1(0.5);
    g.q0 = g1(1.0, 2.0);
    const BoundTerms bg = bound_terms(centered, 0.01, 1024, 3000, InitSpec(g));
    CHECK(bg.B0 == doctest::Approx(0.25 + 1.0 + 2.0).epsilon(1e-12));
    const auto [ts, ps] = centered.analytic_optimum();
    CHECK(bg.d0 == doctest::Approx(d_metric(g.theta0, g.q0, ts, ps)).epsilon(1e-12));
}

TEST_CASE("log Z upper bound via the xLSI") {
    const QuadraticModel toy = models::toy_1d(1.0);
    const double log_z_star = -optimal_free_energy(toy);
    const auto [theta_star, pi_star] = toy.analytic_optimum();
    CHECK(xlsi_upper_bound_logZ(toy, theta_star, pi_star) ==
          doctest::Approx(log_z_star).epsilon(1e-12));

    // on the posterior slice: bound - log Z_* = (1/(2 lambda) - 1) (y-th)^2/4
    for (const double th : {-1.0, 0.2}) {
        const double gap = (1.0 - th) * (1.0 - th) / 4.0;
        const double expected = (1.0 / (2.0 * kLambdaToy) - 1.0) * gap;
        CHECK(xlsi_upper_bound_logZ(toy, vec1(th), toy.posterior(vec1(th))) - log_z_star ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}
