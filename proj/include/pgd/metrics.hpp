#ifndef PGD_METRICS_HPP
#define PGD_METRICS_HPP

#include <vector>

#include "pgd/gaussian.hpp"
#include "pgd/model.hpp"
#include "pgd/sampler.hpp"

namespace pgd {

// Uniformly weighted point cloud, one point per row.
using PointCloud = Mat;

// Exact Wasserstein-2 distance between equal-size uniform empirical measures:
// sorted pairing in one dimension, exact assignment (Jonker-Volgenant style
// shortest augmenting paths) otherwise. Hard cap N <= 4096 (cubic cost).
double w2_empirical(const PointCloud& a, const PointCloud& b);

// W2 between a 1-d empirical measure and a Gaussian via the quantile
// representation, integrating (F_N^{-1}(u) - F_g^{-1}(u))^2 per interval with
// adaptive quadrature (absolute tolerance 1e-8 on the squared distance).
double w2_cloud_to_gaussian_1d(const PointCloud& a, double mean, double sd);
double w2_cloud_to_gaussian_1d(const PointCloud& a, const GaussianMeasure& g);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int n_points = 0;
};

// Least squares through (log x, log y); fits power-law exponents.
SlopeFit loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Least squares through (t, log y); the decay rate is -slope.
SlopeFit exp_rate_fit(const std::vector<double>& ts, const std::vector<double>& ys);

// Monte Carlo estimate of the random-variable metric of the PGD error bound
// under the independent coupling: each replicate runs the sampler with a
// derived seed and measures |Theta_K - theta_*|^2 + W2(Q_K, Q*^N)^2 against a
// fresh N-sample Q*^N from pi_*.
struct DRandomEstimate {
    double estimate = 0.0;  // sqrt(mean of squared distances)
    double std_error = 0.0; // delta-method standard error of the estimate
    double theta_rms = 0.0; // sqrt(mean |Theta_K - theta_*|^2)
    double w2_rms = 0.0;    // sqrt(mean W2(Q_K, Q*^N)^2)
    int replicates = 0;
};

DRandomEstimate d_random_estimate(const RunConfig& config, const LatentModel& model,
                                  int replicates, int workers = 1);

// Analytic optimum dispatch for models that have one.
std::pair<Vec, GaussianMeasure> analytic_optimum_of(const LatentModel& model);

} // namespace pgd

#endif
