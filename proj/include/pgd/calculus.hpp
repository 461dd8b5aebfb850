#ifndef PGD_CALCULUS_HPP
#define PGD_CALCULUS_HPP

#include <utility>
#include <vector>

#include "pgd/gaussian.hpp"
#include "pgd/model.hpp"
#include "pgd/sampler.hpp"

namespace pgd {

// Closed-form evaluation layer for quadratic models with Gaussian q. Every
// quantity here is exact up to floating point; the Monte Carlo counterparts
// live in the test oracles.

// F(theta, q) = KL(q || pi_theta) - log Z_theta
double free_energy(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q);

// F_* = -log Z_* (free energy at the analytic optimum)
double optimal_free_energy(const QuadraticModel& model);

// I(theta, q) = |E_q grad_theta l|^2 + E_q |grad_x log(q / rho_theta)|^2
double fisher_info(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q);

// Wasserstein-2 distance between Gaussians (Bures closed form).
double w2_gaussian(const GaussianMeasure& a, const GaussianMeasure& b);

// d((theta,q),(theta',q')) = sqrt(|theta - theta'|^2 + W2(q,q')^2)
double d_metric(VecCRef theta_a, const GaussianMeasure& qa, VecCRef theta_b,
                const GaussianMeasure& qb);

struct FlowState {
    Vec theta;
    GaussianMeasure q;
    double t = 0.0;
};

struct FlowDeriv {
    Vec dtheta;
    Vec dmean;
    Mat dcov;
};

// Moment ODEs of the free-energy gradient flow, exact for quadratic l:
//   dtheta/dt = grad_theta l(theta, m)
//   dm/dt     = grad_x l(theta, m)
//   dS/dt     = H_xx S + S H_xx + 2 I
FlowDeriv flow_rhs(const QuadraticModel& model, const FlowState& state);

// Classic fixed-step RK4 on the moment ODEs; records every record_stride-th
// state plus the endpoint.
std::vector<FlowState> integrate_flow(const QuadraticModel& model, const FlowState& init,
                                      double t_end, double dt, long record_stride = 1);

// |centered-difference dF/dt + I| / max(1, I) at interior points of a
// uniformly spaced trajectory (de Bruijn identity check).
std::vector<double> debruijn_residual(const QuadraticModel& model,
                                      const std::vector<FlowState>& trajectory);

// d_t e^{lambda t} - d_0 along a trajectory; non-positive when the flow
// contracts at rate lambda.
std::vector<double> contraction_excess(const QuadraticModel& model,
                                    const std::vector<FlowState>& trajectory);

// I / (2 lambda [F - F_*]); at least 1 for strongly log-concave models.
// Near-optimal states (F - F_* < 1e-12) are rejected.
double xlsi_ratio(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q);

// 2 [F - F_*] - lambda d((theta,q),(theta_*,pi_*))^2; non-negative under the
// extended Talagrand inequality.
double xt2i_slack(const QuadraticModel& model, VecCRef theta, const GaussianMeasure& q);

// I/(2 lambda) - F; an upper bound on log Z_* with equality at the optimum.
double xlsi_upper_bound_logZ(const QuadraticModel& model, VecCRef theta,
                             const GaussianMeasure& q);

// Explicit constants of the non-asymptotic PGD error bound.
struct BoundTerms {
    double lambda = 0.0;
    double L = 0.0;
    double iota = 0.0; // 2 L lambda / (L + lambda)
    double B0 = 0.0;   // |theta_0|^2 + E|X_0|^2
    double A0h = 0.0;
    double dx = 0.0;
    double d0 = 0.0;              // d((theta_0,q_0),(theta_*,pi_*)) (warm start: 2 sqrt(dx/lambda))
    double term_discretization = 0.0; // sqrt(h) A_{0,h}
    double term_particles = 0.0;      // (L sqrt(2) / (lambda sqrt(N))) sqrt(B0 + 2 dx / lambda)
    double term_flow = 0.0;           // d0 e^{-h lambda K}

    double total() const { return term_discretization + term_particles + term_flow; }
};

// Requires a centered model (maximizer at the origin) and h <= 1/(lambda+L).
BoundTerms bound_terms(const QuadraticModel& model, double h, Eigen::Index n_particles,
                       long k_steps, const InitSpec& init);

// Reproducible random Gaussian states for inequality sweeps: means and theta
// uniform in [-3,3], covariance A A^T + 0.1 I with A entries uniform in [-1,1].
std::vector<std::pair<Vec, GaussianMeasure>> gaussian_state_sweep(Eigen::Index d_theta,
                                                                  Eigen::Index d_x, int count,
                                                                  std::uint64_t seed);

} // namespace pgd

#endif
