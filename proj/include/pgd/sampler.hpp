#ifndef PGD_SAMPLER_HPP
#define PGD_SAMPLER_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "pgd/gaussian.hpp"
#include "pgd/model.hpp"

namespace pgd {

// Particles live in the rows, so each particle's coordinates are contiguous.
using ParticleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ParticleState {
    Vec theta;
    ParticleMatrix particles; // N x d_x
    long step_index = 0;

    Eigen::Index num_particles() const { return particles.rows(); }
    Eigen::Index dim_x() const { return particles.cols(); }
};

// |theta|^2 + N^{-1} sum_n |X^n|^2, the quantity the uniform-in-time moment
// bounds control.
double estimate_moment(const ParticleState& state);

enum class Algorithm { PGD, IPLA };

// Initialization choices. WarmStart puts theta at the log-likelihood
// maximizer and every particle at the matching latent maximizer (for a
// centered model this is (0, delta_0)).
struct WarmStartInit {};
struct GaussianInit {
    Vec theta0;
    GaussianMeasure q0;
};
struct ExplicitInit {
    ParticleState state;
};
using InitSpec = std::variant<WarmStartInit, GaussianInit, ExplicitInit>;

struct RunConfig {
    double h = 1e-2;
    Eigen::Index n_particles = 1;
    long k_steps = 0;
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::PGD;
    InitSpec init = WarmStartInit{};
    long record_every = 0; // 0 = snapshots at step 0 and step K only
    bool record_full_particles = false;
};

struct Snapshot {
    long step = 0;
    Vec theta;
    Vec mean_x;
    Mat cov_x; // population covariance of the particle cloud
    std::optional<ParticleMatrix> particles;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    ParticleState final_state;
};

// One transition of Algorithm 1. Both gradient evaluations use the incoming
// theta; the noise matrix holds the standard-normal draws W_k^n.
//   theta' = theta + (h/N) sum_n grad_theta l(theta, X^n)
//   X^n'   = X^n + h grad_x l(theta, X^n) + sqrt(2h) W^n
ParticleState pgd_step(const ParticleState& state, const LatentModel& model, double h,
                       const ParticleMatrix& noise);

// PGD step plus the extra sqrt(2h/N) noise_theta term on the parameter update.
ParticleState ipla_step(const ParticleState& state, const LatentModel& model, double h,
                        const ParticleMatrix& noise_x, const Vec& noise_theta);

// Runs K steps with counter-keyed noise. Bitwise deterministic in
// (config, model) and independent of any worker pool the caller uses.
Trajectory run(const RunConfig& config, const LatentModel& model);

// Resolves an InitSpec to a concrete state (exposed for tests and the bound
// machinery, which needs B_0 of the initial condition).
ParticleState resolve_init(const RunConfig& config, const LatentModel& model);

} // namespace pgd

#endif
