#include "pgd/sampler.hpp"

#include <cmath>
#include <string>

#include "pgd/errors.hpp"
#include "pgd/rng.hpp"

namespace pgd {

double estimate_moment(const ParticleState& state) {
    const double n = static_cast<double>(state.num_particles());
    return state.theta.squaredNorm() + state.particles.squaredNorm() / n;
}

namespace {

struct StepWorkspace {
    Vec g_theta, g_x, g_theta_sum;
    explicit StepWorkspace(const LatentModel& m)
        : g_theta(m.dim_theta()), g_x(m.dim_x()), g_theta_sum(m.dim_theta()) {}
};

void apply_step(ParticleState& state, const LatentModel& model, double h,
                const ParticleMatrix& noise_x, const Vec* noise_theta, double theta_noise_scale,
                StepWorkspace& ws) {
    const Eigen::Index n = state.num_particles();
    const Eigen::Index d_x = model.dim_x();
    if (h <= 0.0) throw_config("step: h must be positive");
    if (state.theta.size() != model.dim_theta() ||
        state.particles.cols() != static_cast<Eigen::Index>(d_x))
        throw_config("step: state dimensions do not match model");
    if (noise_x.rows() != n || noise_x.cols() != d_x)
        throw_config("step: noise matrix must be N x d_x");

    const double sqrt_2h = std::sqrt(2.0 * h);
    ws.g_theta_sum.setZero();
    bool finite = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        model.grad(state.theta, state.particles.row(i).transpose(), ws.g_theta, ws.g_x);
        ws.g_theta_sum += ws.g_theta;
        for (Eigen::Index j = 0; j < d_x; ++j) {
            const double v = state.particles(i, j) + h * ws.g_x(j) + sqrt_2h * noise_x(i, j);
            finite = finite && std::isfinite(v);
            state.particles(i, j) = v;
        }
    }
    state.theta += (h / static_cast<double>(n)) * ws.g_theta_sum;
    if (noise_theta != nullptr) {
        if (noise_theta->size() != state.theta.size())
            throw_config("step: theta noise dimension mismatch");
        state.theta += theta_noise_scale * (*noise_theta);
    }
    for (Eigen::Index j = 0; j < state.theta.size(); ++j)
        finite = finite && std::isfinite(state.theta(j));
    if (!finite)
        throw NumericalBlowup(state.step_index,
                              "non-finite value at step " + std::to_string(state.step_index));
    ++state.step_index;
}
} // namespace

ParticleState pgd_step(const ParticleState& state, const LatentModel& model, double h,
                       const ParticleMatrix& noise) {
    ParticleState next = state;
    StepWorkspace ws(model);
    apply_step(next, model, h, noise, nullptr, 0.0, ws);
    return next;
}

ParticleState ipla_step(const ParticleState& state, const LatentModel& model, double h,
                        const ParticleMatrix& noise_x, const Vec& noise_theta) {
    ParticleState next = state;
    StepWorkspace ws(model);
    const double scale = std::sqrt(2.0 * h / static_cast<double>(state.num_particles()));
    apply_step(next, model, h, noise_x, &noise_theta, scale, ws);
    return next;
}

ParticleState resolve_init(const RunConfig& config, const LatentModel& model) {
    if (config.n_particles < 1) throw_config("run: need at least one particle");
    ParticleState state;
    state.step_index = 0;
    if (std::holds_alternative<WarmStartInit>(config.init)) {
        Vec z;
        if (const auto* q = dynamic_cast<const QuadraticModel*>(&model)) {
            z = q->joint_maximizer();
        } else if (const auto* f = dynamic_cast<const FactorizedGaussianModel*>(&model)) {
            z = f->joint_maximizer();
        } else {
            throw_config("run: warm start needs a model with a computable maximizer");
        }
        state.theta = z.head(model.dim_theta());
        state.particles = z.tail(model.dim_x()).transpose().replicate(config.n_particles, 1);
    } else if (const auto* g = std::get_if<GaussianInit>(&config.init)) {
        if (g->theta0.size() != model.dim_theta() || g->q0.dim() != model.dim_x())
            throw_config("run: gaussian init dimensions do not match model");
        state.theta = g->theta0;
        state.particles.resize(config.n_particles, model.dim_x());
        for (Eigen::Index i = 0; i < config.n_particles; ++i)
            state.particles.row(i) =
                g->q0.sample(config.seed, static_cast<std::uint32_t>(i), rng::Stream::Init)
                    .transpose();
    } else {
        const auto& e = std::get<ExplicitInit>(config.init);
        if (e.state.theta.size() != model.dim_theta() || e.state.particles.cols() != model.dim_x())
            throw_config("run: explicit init dimensions do not match model");
        if (e.state.particles.rows() != config.n_particles)
            throw_config("run: explicit init particle count does not match config");
        state = e.state;
        state.step_index = 0;
    }
    if (!state.particles.allFinite() || !state.theta.allFinite())
        throw_config("run: initial state contains non-finite values");
    return state;
}

namespace {

Snapshot make_snapshot(const ParticleState& state, bool full) {
    Snapshot snap;
    snap.step = state.step_index;
    snap.theta = state.theta;
    const double n = static_cast<double>(state.num_particles());
    snap.mean_x = state.particles.colwise().mean().transpose();
    ParticleMatrix centered = state.particles.rowwise() - snap.mean_x.transpose();
    snap.cov_x = Mat(centered.transpose() * centered) / n;
    if (full) snap.particles = state.particles;
    return snap;
}

} // namespace

Trajectory run(const RunConfig& config, const LatentModel& model) {
    if (config.k_steps < 0) throw_config("run: K must be non-negative");
    long record_every = config.record_every;
    if (record_every == 0) record_every = std::max<long>(config.k_steps, 1);
    if (record_every < 1) throw_config("run: record_every must be positive");
    if (config.k_steps > 0 && record_every > config.k_steps)
        throw_config("run: record_every must not exceed K");

    ParticleState state = resolve_init(config, model);

    Trajectory traj;
    traj.snapshots.push_back(make_snapshot(state, config.record_full_particles));

    const Eigen::Index n = config.n_particles;
    const Eigen::Index d_x = model.dim_x();
    const Eigen::Index d_theta = model.dim_theta();
    ParticleMatrix noise(n, d_x);
    Vec theta_noise(d_theta);
    StepWorkspace ws(model);

    for (long k = 0; k < config.k_steps; ++k) {
        const auto step32 = static_cast<std::uint32_t>(k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d_x; ++j)
                noise(i, j) = rng::normal(config.seed, step32, static_cast<std::uint32_t>(i),
                                          static_cast<std::uint32_t>(j),
                                          rng::Stream::ParticleNoise);
        if (config.algorithm == Algorithm::IPLA) {
            for (Eigen::Index j = 0; j < d_theta; ++j)
                theta_noise(j) = rng::normal(config.seed, step32, 0,
                                             static_cast<std::uint32_t>(j),
                                             rng::Stream::ThetaNoise);
            const double scale = std::sqrt(2.0 * config.h / static_cast<double>(n));
            apply_step(state, model, config.h, noise, &theta_noise, scale, ws);
        } else {
            apply_step(state, model, config.h, noise, nullptr, 0.0, ws);
        }
        const bool due = ((k + 1) % record_every == 0) || (k + 1 == config.k_steps);
        if (due) {
            const bool full = config.record_full_particles && (k + 1 == config.k_steps);
            traj.snapshots.push_back(
                make_snapshot(state, config.record_full_particles || full));
        }
    }

    traj.final_state = std::move(state);
    return traj;
}

} // namespace pgd
