#include "pgd/calculus.hpp"

#include <cmath>
#include <string>

#include "pgd/errors.hpp"
#include "pgd/rng.hpp"

namespace pgd {

double free_energy(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q) {
    if (theta.size() != model.dim_theta() || q.dim() != model.dim_x())
        throw_config("free_energy: dimension mismatch");
    const GaussianMeasure pi = model.posterior(theta);
    const Mat prec = Mat(-model.h_x_x()); // pi's precision
    const Vec dm = q.mean - pi.mean;
    const double kl = 0.5 * ((prec * q.cov).trace() + dm.dot(prec * dm) -
                             static_cast<double>(model.dim_x()) + pi.log_det_cov() -
                             q.log_det_cov());
    return kl - model.log_marginal(theta);
}

double optimal_free_energy(const QuadraticModel& model) {
    const Vec z = model.joint_maximizer();
    return -model.log_marginal(z.head(model.dim_theta()));
}

double fisher_info(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q) {
    if (theta.size() != model.dim_theta() || q.dim() != model.dim_x())
        throw_config("fisher_info: dimension mismatch");
    // Both integrands are quadratic in x under a Gaussian q:
    //   E grad_theta l = grad_theta l(theta, m),
    //   grad_x log(q/rho_theta)(x) = -(S^{-1} + H_xx)(x - m) - grad_x l(theta, m).
    const auto [g_theta, g_x] = model.grad(Vec(theta), q.mean);
    const Mat s_inv = q.chol_lower()
                          .triangularView<Eigen::Lower>()
                          .solve(Mat::Identity(q.dim(), q.dim()));
    const Mat prec = s_inv.transpose() * s_inv; // S^{-1}
    const Mat b = prec + model.h_x_x();
    const double trace_term = (b * q.cov * b).trace();
    return g_theta.squaredNorm() + g_x.squaredNorm() + trace_term;
}

double w2_gaussian(const GaussianMeasure& a, const GaussianMeasure& b) {
    if (a.dim() != b.dim()) throw_config("w2_gaussian: dimension mismatch");
    const Mat rb = linalg::sqrt_spd(b.cov);
    Mat inner = rb * a.cov * rb;
    inner = 0.5 * (inner + inner.transpose());
    const auto eig = linalg::jacobi_eigen(inner);
    double cross = 0.0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        cross += std::sqrt(std::max(0.0, eig.values(i)));
    const double sq = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() -
                      2.0 * cross;
    // The trace difference cancels to roundoff for (near-)identical measures;
    // snap below the achievable resolution so equal inputs give exactly zero.
    const double scale = std::max(1.0, a.cov.trace() + b.cov.trace());
    if (sq <= 1e-12 * scale) return 0.0;
    return std::sqrt(sq);
}

double d_metric(VecCRef theta_a, const GaussianMeasure& qa, VecCRef theta_b,
                const GaussianMeasure& qb) {
    if (theta_a.size() != theta_b.size()) throw_config("d_metric: dimension mismatch");
    const double w2 = w2_gaussian(qa, qb);
    return std::sqrt((theta_a - theta_b).squaredNorm() + w2 * w2);
}

namespace {

// RHS on raw moments, no SPD validation (RK4 stages may probe slightly
// infeasible covariances).
void moment_rhs(const QuadraticModel& model, const Vec& theta, const Vec& mean, const Mat& cov,
                Vec& dtheta, Vec& dmean, Mat& dcov) {
    dtheta.noalias() = model.h_theta_theta() * theta;
    dtheta.noalias() += model.h_theta_x() * mean;
    dtheta += model.linear().head(model.dim_theta());
    dmean.noalias() = model.h_x_theta() * theta;
    dmean.noalias() += model.h_x_x() * mean;
    dmean += model.linear().tail(model.dim_x());
    dcov.noalias() = model.h_x_x() * cov;
    dcov.noalias() += cov * model.h_x_x();
    dcov += 2.0 * Mat::Identity(cov.rows(), cov.cols());
}

} // namespace

FlowDeriv flow_rhs(const QuadraticModel& model, const FlowState& state) {
    if (state.theta.size() != model.dim_theta() || state.q.dim() != model.dim_x())
        throw_config("flow_rhs: dimension mismatch");
    FlowDeriv d;
    d.dtheta.resize(model.dim_theta());
    d.dmean.resize(model.dim_x());
    d.dcov.resize(model.dim_x(), model.dim_x());
    moment_rhs(model, state.theta, state.q.mean, state.q.cov, d.dtheta, d.dmean, d.dcov);
    return d;
}

std::vector<FlowState> integrate_flow(const QuadraticModel& model, const FlowState& init,
                                      double t_end, double dt, long record_stride) {
    if (dt <= 0.0) throw_config("integrate_flow: dt must be positive");
    if (t_end < 0.0) throw_config("integrate_flow: t_end must be non-negative");
    if (record_stride < 1) throw_config("integrate_flow: record_stride must be positive");
    if (init.theta.size() != model.dim_theta() || init.q.dim() != model.dim_x())
        throw_config("integrate_flow: dimension mismatch");

    const long steps = static_cast<long>(std::llround(t_end / dt));
    Vec theta = init.theta;
    Vec mean = init.q.mean;
    Mat cov = init.q.cov;

    std::vector<FlowState> out;
    out.reserve(static_cast<std::size_t>(steps / record_stride) + 2);
    out.push_back({theta, GaussianMeasure(mean, cov), 0.0});

    const Eigen::Index dt_dim = model.dim_theta();
    const Eigen::Index dx_dim = model.dim_x();
    Vec k1t(dt_dim), k2t(dt_dim), k3t(dt_dim), k4t(dt_dim);
    Vec k1m(dx_dim), k2m(dx_dim), k3m(dx_dim), k4m(dx_dim);
    Mat k1c(dx_dim, dx_dim), k2c(dx_dim, dx_dim), k3c(dx_dim, dx_dim), k4c(dx_dim, dx_dim);

    for (long step = 0; step < steps; ++step) {
        moment_rhs(model, theta, mean, cov, k1t, k1m, k1c);
        moment_rhs(model, theta + 0.5 * dt * k1t, mean + 0.5 * dt * k1m, cov + 0.5 * dt * k1c,
                   k2t, k2m, k2c);
        moment_rhs(model, theta + 0.5 * dt * k2t, mean + 0.5 * dt * k2m, cov + 0.5 * dt * k2c,
                   k3t, k3m, k3c);
        moment_rhs(model, theta + dt * k3t, mean + dt * k3m, cov + dt * k3c, k4t, k4m, k4c);
        theta += (dt / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        mean += (dt / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        cov += (dt / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        cov = 0.5 * (cov + cov.transpose());

        if ((step + 1) % record_stride == 0 || step + 1 == steps) {
            const double t = static_cast<double>(step + 1) * dt;
            try {
                out.push_back({theta, GaussianMeasure(mean, cov), t});
            } catch (const Error&) {
                throw Error(ErrorKind::Numerical,
                            "integrate_flow: covariance left the SPD cone near t = " +
                                std::to_string(t) + "; retry with a smaller dt");
            }
        }
    }
    return out;
}

std::vector<double> debruijn_residual(const QuadraticModel& model,
                                      const std::vector<FlowState>& trajectory) {
    if (trajectory.size() < 3)
        throw_config("debruijn_residual: need at least three states");
    const double dt = trajectory[1].t - trajectory[0].t;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        const double gap = trajectory[i].t - trajectory[i - 1].t;
        if (std::fabs(gap - dt) > 1e-9 * std::max(1.0, std::fabs(dt)))
            throw_config("debruijn_residual: trajectory must be uniformly spaced");
    }
    std::vector<double> f(trajectory.size());
    for (std::size_t i = 0; i < trajectory.size(); ++i)
        f[i] = free_energy(model, trajectory[i].theta, trajectory[i].q);
    std::vector<double> out;
    out.reserve(trajectory.size() - 2);
    for (std::size_t i = 1; i + 1 < trajectory.size(); ++i) {
        const double dfdt = (f[i + 1] - f[i - 1]) / (2.0 * dt);
        const double info = fisher_info(model, trajectory[i].theta, trajectory[i].q);
        out.push_back(std::fabs(dfdt + info) / std::max(1.0, info));
    }
    return out;
}

std::vector<double> contraction_excess(const QuadraticModel& model,
                                    const std::vector<FlowState>& trajectory) {
    if (trajectory.empty()) return {};
    const double lambda = model.concavity_constants().lambda;
    const auto [theta_star, pi_star] = model.analytic_optimum();
    std::vector<double> out;
    out.reserve(trajectory.size());
    const double d0 = d_metric(trajectory.front().theta, trajectory.front().q, theta_star,
                               pi_star);
    for (const auto& s : trajectory) {
        const double dt_val = d_metric(s.theta, s.q, theta_star, pi_star);
        out.push_back(dt_val * std::exp(lambda * s.t) - d0);
    }
    return out;
}

double xlsi_ratio(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q) {
    const double lambda = model.concavity_constants().lambda;
    const double gap = free_energy(model, theta, q) - optimal_free_energy(model);
    if (gap < 1e-12)
        throw_precondition("xlsi_ratio: state is numerically optimal (F - F_* < 1e-12)");
    return fisher_info(model, theta, q) / (2.0 * lambda * gap);
}

double xt2i_slack(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q) {
    const double lambda = model.concavity_constants().lambda;
    const auto [theta_star, pi_star] = model.analytic_optimum();
    const double gap = free_energy(model, theta, q) - optimal_free_energy(model);
    const double dist = d_metric(theta, q, theta_star, pi_star);
    return 2.0 * gap - lambda * dist * dist;
}

double xlsi_upper_bound_logZ(const QuadraticModel& model, VecCRef theta,
                             const GaussianMeasure& q) {
    const double lambda = model.concavity_constants().lambda;
    return fisher_info(model, theta, q) / (2.0 * lambda) - free_energy(model, theta, q);
}

BoundTerms bound_terms(const QuadraticModel& model, double h, Eigen::Index n_particles,
                       long k_steps, const InitSpec& init) {
    const auto cc = model.concavity_constants();
    BoundTerms bt;
    bt.lambda = cc.lambda;
    bt.L = cc.L;
    bt.dx = static_cast<double>(model.dim_x());
    if (h <= 0.0 || h > 1.0 / (cc.lambda + cc.L))
        throw_precondition("bound_terms: requires 0 < h <= 1/(lambda+L)");
    if (n_particles < 1 || k_steps < 0) throw_config("bound_terms: bad N or K");

    const Vec z = model.joint_maximizer();
    if (z.norm() > 1e-9 * std::max(1.0, model.linear().norm()))
        throw_precondition("bound_terms: model must be centered (shift_to_origin first)");

    bt.iota = 2.0 * cc.L * cc.lambda / (cc.L + cc.lambda);

    if (std::holds_alternative<WarmStartInit>(init)) {
        bt.B0 = 0.0;
        bt.d0 = 2.0 * std::sqrt(bt.dx / cc.lambda);
    } else if (const auto* g = std::get_if<GaussianInit>(&init)) {
        bt.B0 = g->theta0.squaredNorm() + g->q0.mean.squaredNorm() + g->q0.cov.trace();
        const auto [theta_star, pi_star] = model.analytic_optimum();
        bt.d0 = d_metric(g->theta0, g->q0, theta_star, pi_star);
    } else {
        throw_unsupported("bound_terms: explicit initial states are not supported");
    }

    const double moment = bt.B0 + 2.0 * bt.dx / cc.lambda;
    bt.A0h = std::sqrt((4.0 * h + 4.0 / bt.iota) / bt.iota * 220.0 * cc.L * cc.L *
                       (cc.L * cc.L * h * moment + bt.dx));
    bt.term_discretization = std::sqrt(h) * bt.A0h;
    bt.term_particles = cc.L * std::sqrt(2.0) /
                        (cc.lambda * std::sqrt(static_cast<double>(n_particles))) *
                        std::sqrt(moment);
    bt.term_flow = bt.d0 * std::exp(-h * cc.lambda * static_cast<double>(k_steps));
    return bt;
}

std::vector<std::pair<Vec, GaussianMeasure>> gaussian_state_sweep(Eigen::Index d_theta,
                                                                  Eigen::Index d_x, int count,
                                                                  std::uint64_t seed) {
    if (count < 0) throw_config("gaussian_state_sweep: negative count");
    std::vector<std::pair<Vec, GaussianMeasure>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        std::uint32_t coord = 0;
        auto draw = [&]() {
            return rng::uniform01(seed, static_cast<std::uint32_t>(s), 0, coord++,
                                  rng::Stream::Sweep);
        };
        Vec theta(d_theta);
        for (Eigen::Index i = 0; i < d_theta; ++i) theta(i) = -3.0 + 6.0 * draw();
        Vec mean(d_x);
        for (Eigen::Index i = 0; i < d_x; ++i) mean(i) = -3.0 + 6.0 * draw();
        Mat a(d_x, d_x);
        for (Eigen::Index i = 0; i < d_x; ++i)
            for (Eigen::Index j = 0; j < d_x; ++j) a(i, j) = -1.0 + 2.0 * draw();
        const Mat cov = a * a.transpose() + 0.1 * Mat::Identity(d_x, d_x);
        out.emplace_back(std::move(theta), GaussianMeasure(mean, cov));
    }
    return out;
}

} // namespace pgd
