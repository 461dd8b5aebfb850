#ifndef PGD_MODEL_HPP
#define PGD_MODEL_HPP

#include <memory>
#include <utility>

#include "pgd/gaussian.hpp"
#include "pgd/linalg.hpp"

namespace pgd {

using VecCRef = Eigen::Ref<const Vec>;

struct ConcavityConstants {
    double lambda; // strong-concavity constant, smallest eigenvalue of -H
    double L;      // gradient Lipschitz constant, largest eigenvalue of -H
};

// Latent variable model with joint log-likelihood l(theta, x) = log p_theta(x, y).
// Evaluators are pure and immutable after construction, so a single instance
// may be shared across worker threads.
class LatentModel {
public:
    virtual ~LatentModel() = default;

    virtual Eigen::Index dim_theta() const = 0;
    virtual Eigen::Index dim_x() const = 0;

    virtual double log_lik(VecCRef theta, VecCRef x) const = 0;

    // Writes (grad_theta l, grad_x l) into presized outputs; the hot path of
    // the sampler, so implementations must not allocate.
    virtual void grad(VecCRef theta, VecCRef x, Eigen::Ref<Vec> g_theta,
                      Eigen::Ref<Vec> g_x) const = 0;

    std::pair<Vec, Vec> grad(VecCRef theta, VecCRef x) const {
        Vec gt(dim_theta()), gx(dim_x());
        grad(theta, x, gt, gx);
        return {std::move(gt), std::move(gx)};
    }
    Vec grad_theta(VecCRef theta, VecCRef x) const { return grad(theta, x).first; }
    Vec grad_x(VecCRef theta, VecCRef x) const { return grad(theta, x).second; }

protected:
    void require_dims(VecCRef theta, VecCRef x) const;
};

// l(z) = 0.5 z^T H z + b^T z + c over z = (theta, x), with H symmetric and
// -H positive definite for the strongly log-concave case. The whole analytic
// layer (posteriors, marginals, moment ODEs) hangs off this class.
class QuadraticModel final : public LatentModel {
public:
    QuadraticModel(Eigen::Index d_theta, Mat hessian, Vec linear, double constant);

    Eigen::Index dim_theta() const override { return d_theta_; }
    Eigen::Index dim_x() const override { return d_x_; }
    double log_lik(VecCRef theta, VecCRef x) const override;
    using LatentModel::grad;
    void grad(VecCRef theta, VecCRef x, Eigen::Ref<Vec> g_theta,
              Eigen::Ref<Vec> g_x) const override;

    const Mat& hessian() const { return H_; }
    const Vec& linear() const { return b_; }
    double constant() const { return c_; }

    Eigen::Block<const Mat> h_theta_theta() const { return H_.block(0, 0, d_theta_, d_theta_); }
    Eigen::Block<const Mat> h_theta_x() const { return H_.block(0, d_theta_, d_theta_, d_x_); }
    Eigen::Block<const Mat> h_x_theta() const { return H_.block(d_theta_, 0, d_x_, d_theta_); }
    Eigen::Block<const Mat> h_x_x() const { return H_.block(d_theta_, d_theta_, d_x_, d_x_); }

    ConcavityConstants concavity_constants() const;

    // Joint maximizer z_dagger = -H^{-1} b (requires -H positive definite).
    Vec joint_maximizer() const;

    // Marginal-likelihood maximizer theta_* and exact posterior pi_{theta_*}.
    std::pair<Vec, GaussianMeasure> analytic_optimum() const;

    // Exact Gaussian conditional of x given theta.
    GaussianMeasure posterior(VecCRef theta) const;

    // log Z_theta = log integral exp(l(theta, x)) dx
    double log_marginal(VecCRef theta) const;

    // Same Hessian, maximizer moved to the origin, maximum value 0.
    QuadraticModel shift_to_origin() const;

private:
    Eigen::Index d_theta_;
    Eigen::Index d_x_;
    Mat H_;
    Vec b_;
    double c_;
};

// Sum of M per-datapoint quadratic blocks sharing the parameter theta:
//   l(theta, x) = sum_m lblock(theta, x_m; y_m),
//   lblock(theta, u; y) = 0.5 (theta,u)^T Hb (theta,u) + (b_base + O y)^T (theta,u)
//                         + c_base - 0.5 |y|^2.
// The constant convention matches a unit-covariance Gaussian observation model.
class FactorizedGaussianModel final : public LatentModel {
public:
    FactorizedGaussianModel(Eigen::Index d_theta, Eigen::Index block_d_x, Mat block_hessian,
                            Vec block_linear_base, Mat obs_coupling, double block_constant_base,
                            Mat observations /* M x obs_dim, one row per datapoint */);

    Eigen::Index dim_theta() const override { return d_theta_; }
    Eigen::Index dim_x() const override { return block_d_x_ * num_data_; }
    double log_lik(VecCRef theta, VecCRef x) const override;
    using LatentModel::grad;
    void grad(VecCRef theta, VecCRef x, Eigen::Ref<Vec> g_theta,
              Eigen::Ref<Vec> g_x) const override;

    Eigen::Index datapoints() const { return num_data_; }
    Eigen::Index block_dim_x() const { return block_d_x_; }
    const Mat& block_hessian() const { return block_hessian_; }
    const Vec& block_linear_base() const { return block_linear_base_; }
    const Mat& obs_coupling() const { return obs_coupling_; }
    double block_constant_base() const { return block_constant_base_; }
    const Mat& observations() const { return observations_; }

    // Same block structure over a different set of observations.
    FactorizedGaussianModel with_observations(Mat observations) const {
        return FactorizedGaussianModel(d_theta_, block_d_x_, block_hessian_, block_linear_base_,
                                       obs_coupling_, block_constant_base_,
                                       std::move(observations));
    }

    // Per-datapoint quadratic block for datapoint m, as a standalone model.
    QuadraticModel block_model(Eigen::Index m) const;

    // Dense joint quadratic equivalent (arrowhead Hessian).
    QuadraticModel joint() const;

    ConcavityConstants concavity_constants() const { return joint().concavity_constants(); }
    Vec joint_maximizer() const { return joint().joint_maximizer(); }
    std::pair<Vec, GaussianMeasure> analytic_optimum() const { return joint().analytic_optimum(); }

private:
    Vec block_linear(Eigen::Index m) const;
    double block_constant(Eigen::Index m) const;

    Eigen::Index d_theta_;
    Eigen::Index block_d_x_;
    Mat block_hessian_;
    Vec block_linear_base_;
    Mat obs_coupling_;
    double block_constant_base_;
    Mat observations_;
    Eigen::Index num_data_;
};

// Bayesian logistic regression with a Gaussian hierarchy on the coefficients:
//   labels t_j ~ Bernoulli(sigmoid(d_j . x)),  x ~ N(theta, 1/prec_x I),
//   theta ~ N(0, 1/prec_theta I).
// Concave in (theta, x) but with no closed-form optimum; exercised through
// self-consistency tests only.
class LogisticModel final : public LatentModel {
public:
    LogisticModel(Mat design, Vec labels, double prior_precision_theta,
                  double prior_precision_x);

    Eigen::Index dim_theta() const override { return design_.cols(); }
    Eigen::Index dim_x() const override { return design_.cols(); }
    double log_lik(VecCRef theta, VecCRef x) const override;
    using LatentModel::grad;
    void grad(VecCRef theta, VecCRef x, Eigen::Ref<Vec> g_theta,
              Eigen::Ref<Vec> g_x) const override;

private:
    Mat design_;
    Vec labels_;
    double prec_theta_;
    double prec_x_;
};

namespace models {

// Reference model used throughout the tests and experiments:
//   x ~ N(theta, 1), y | x ~ N(x, 1), one observation y, fully normalized
//   densities. -H = [[1,-1],[-1,2]], eigenvalues (3 -+ sqrt(5))/2.
QuadraticModel toy_1d(double y);

// Fixed strongly concave quadratic with d_theta = 1, d_x = 2.
QuadraticModel example_3d();

// One toy block per observation, shared theta.
FactorizedGaussianModel factorized_toy(const Vec& ys);

} // namespace models

} // namespace pgd

#endif
