#include "pgd/model.hpp"

#include <cmath>
#include <numbers>

#include "pgd/errors.hpp"

namespace pgd {

void LatentModel::require_dims(VecCRef theta, VecCRef x) const {
    if (theta.size() != dim_theta() || x.size() != dim_x())
        throw_config("model evaluation: dimension mismatch");
}

// ---------------------------------------------------------------------------
// QuadraticModel

QuadraticModel::QuadraticModel(Eigen::Index d_theta, Mat hessian, Vec linear, double constant)
    : d_theta_(d_theta), H_(std::move(hessian)), b_(std::move(linear)), c_(constant) {
    const Eigen::Index n = H_.rows();
    if (H_.cols() != n) throw_config("QuadraticModel: Hessian must be square");
    if (b_.size() != n) throw_config("QuadraticModel: linear term size mismatch");
    if (d_theta_ < 1 || d_theta_ >= n) throw_config("QuadraticModel: invalid d_theta");
    if (!H_.isApprox(H_.transpose(), 1e-12))
        throw_config("QuadraticModel: Hessian must be symmetric");
    H_ = 0.5 * (H_ + H_.transpose());
    d_x_ = n - d_theta_;
}

double QuadraticModel::log_lik(VecCRef theta, VecCRef x) const {
    require_dims(theta, x);
    Vec z(d_theta_ + d_x_);
    z << theta, x;
    return 0.5 * z.dot(H_ * z) + b_.dot(z) + c_;
}

void QuadraticModel::grad(VecCRef theta, VecCRef x, Eigen::Ref<Vec> g_theta,
                          Eigen::Ref<Vec> g_x) const {
    require_dims(theta, x);
    g_theta.noalias() = h_theta_theta() * theta;
    g_theta.noalias() += h_theta_x() * x;
    g_theta += b_.head(d_theta_);
    g_x.noalias() = h_x_theta() * theta;
    g_x.noalias() += h_x_x() * x;
    g_x += b_.tail(d_x_);
}

ConcavityConstants QuadraticModel::concavity_constants() const {
    const auto eig = linalg::jacobi_eigen(Mat(-H_));
    const double lambda = eig.values(0);
    const double L = eig.values(eig.values.size() - 1);
    if (lambda <= 0.0)
        throw_degenerate("model is not strongly concave: -H has a non-positive eigenvalue");
    return {lambda, L};
}

Vec QuadraticModel::joint_maximizer() const {
    Eigen::LLT<Mat> llt(Mat(-H_));
    if (llt.info() != Eigen::Success)
        throw_degenerate("joint_maximizer: -H not positive definite");
    return llt.solve(b_);
}

GaussianMeasure QuadraticModel::posterior(VecCRef theta) const {
    if (theta.size() != d_theta_) throw_config("posterior: theta dimension mismatch");
    Eigen::LLT<Mat> llt(Mat(-h_x_x()));
    if (llt.info() != Eigen::Success)
        throw_degenerate("posterior: conditional covariance is singular");
    const Mat cov = llt.solve(Mat::Identity(d_x_, d_x_));
    const Vec mean = llt.solve(Vec(h_x_theta() * theta + b_.tail(d_x_)));
    return GaussianMeasure(mean, 0.5 * (cov + cov.transpose()));
}

double QuadraticModel::log_marginal(VecCRef theta) const {
    if (theta.size() != d_theta_) throw_config("log_marginal: theta dimension mismatch");
    Eigen::LLT<Mat> llt(Mat(-h_x_x()));
    if (llt.info() != Eigen::Success)
        throw_degenerate("log_marginal: conditional covariance is singular");
    double log_det_neg_hxx = 0.0;
    const Mat l = llt.matrixL();
    for (Eigen::Index i = 0; i < d_x_; ++i) log_det_neg_hxx += 2.0 * std::log(l(i, i));
    const Vec m = llt.solve(Vec(h_x_theta() * theta + b_.tail(d_x_)));
    return log_lik(theta, m) + 0.5 * static_cast<double>(d_x_) * std::log(2.0 * std::numbers::pi) -
           0.5 * log_det_neg_hxx;
}

std::pair<Vec, GaussianMeasure> QuadraticModel::analytic_optimum() const {
    const Vec z = joint_maximizer();
    const Vec theta_star = z.head(d_theta_);
    return {theta_star, posterior(theta_star)};
}

QuadraticModel QuadraticModel::shift_to_origin() const {
    joint_maximizer(); // validates strong concavity
    return QuadraticModel(d_theta_, H_, Vec::Zero(b_.size()), 0.0);
}

// ---------------------------------------------------------------------------
// FactorizedGaussianModel

FactorizedGaussianModel::FactorizedGaussianModel(Eigen::Index d_theta, Eigen::Index block_d_x,
                                                 Mat block_hessian, Vec block_linear_base,
                                                 Mat obs_coupling, double block_constant_base,
                                                 Mat observations)
    : d_theta_(d_theta),
      block_d_x_(block_d_x),
      block_hessian_(std::move(block_hessian)),
      block_linear_base_(std::move(block_linear_base)),
      obs_coupling_(std::move(obs_coupling)),
      block_constant_base_(block_constant_base),
      observations_(std::move(observations)) {
    const Eigen::Index nb = d_theta_ + block_d_x_;
    if (d_theta_ < 1 || block_d_x_ < 1) throw_config("FactorizedGaussianModel: bad dimensions");
    if (block_hessian_.rows() != nb || block_hessian_.cols() != nb)
        throw_config("FactorizedGaussianModel: block Hessian shape mismatch");
    if (!block_hessian_.isApprox(block_hessian_.transpose(), 1e-12))
        throw_config("FactorizedGaussianModel: block Hessian must be symmetric");
    if (block_linear_base_.size() != nb)
        throw_config("FactorizedGaussianModel: block linear size mismatch");
    if (obs_coupling_.rows() != nb)
        throw_config("FactorizedGaussianModel: obs coupling shape mismatch");
    if (observations_.cols() != obs_coupling_.cols())
        throw_config("FactorizedGaussianModel: observation dimension mismatch");
    num_data_ = observations_.rows();
    if (num_data_ < 1) throw_config("FactorizedGaussianModel: needs at least one observation");
    block_hessian_ = 0.5 * (block_hessian_ + block_hessian_.transpose());
}

Vec FactorizedGaussianModel::block_linear(Eigen::Index m) const {
    return block_linear_base_ + obs_coupling_ * observations_.row(m).transpose();
}

double FactorizedGaussianModel::block_constant(Eigen::Index m) const {
    return block_constant_base_ - 0.5 * observations_.row(m).squaredNorm();
}

QuadraticModel FactorizedGaussianModel::block_model(Eigen::Index m) const {
    return QuadraticModel(d_theta_, block_hessian_, block_linear(m), block_constant(m));
}

double FactorizedGaussianModel::log_lik(VecCRef theta, VecCRef x) const {
    require_dims(theta, x);
    const Eigen::Index nb = d_theta_ + block_d_x_;
    Vec u(nb);
    double total = 0.0;
    for (Eigen::Index m = 0; m < num_data_; ++m) {
        u << theta, x.segment(m * block_d_x_, block_d_x_);
        total += 0.5 * u.dot(block_hessian_ * u) + block_linear(m).dot(u) + block_constant(m);
    }
    return total;
}

void FactorizedGaussianModel::grad(VecCRef theta, VecCRef x, Eigen::Ref<Vec> g_theta,
                                   Eigen::Ref<Vec> g_x) const {
    require_dims(theta, x);
    const auto h_tt = block_hessian_.block(0, 0, d_theta_, d_theta_);
    const auto h_tx = block_hessian_.block(0, d_theta_, d_theta_, block_d_x_);
    const auto h_xt = block_hessian_.block(d_theta_, 0, block_d_x_, d_theta_);
    const auto h_xx = block_hessian_.block(d_theta_, d_theta_, block_d_x_, block_d_x_);
    const auto o_t = obs_coupling_.topRows(d_theta_);
    const auto o_x = obs_coupling_.bottomRows(block_d_x_);

    g_theta.setZero();
    for (Eigen::Index m = 0; m < num_data_; ++m) {
        const auto xm = x.segment(m * block_d_x_, block_d_x_);
        const auto ym = observations_.row(m).transpose();
        auto gm = g_x.segment(m * block_d_x_, block_d_x_);
        g_theta.noalias() += h_tt * theta;
        g_theta.noalias() += h_tx * xm;
        g_theta.noalias() += o_t * ym;
        gm.noalias() = h_xt * theta;
        gm.noalias() += h_xx * xm;
        gm.noalias() += o_x * ym;
        gm += block_linear_base_.tail(block_d_x_);
    }
    g_theta += static_cast<double>(num_data_) * block_linear_base_.head(d_theta_);
}

QuadraticModel FactorizedGaussianModel::joint() const {
    const Eigen::Index n = d_theta_ + block_d_x_ * num_data_;
    Mat H = Mat::Zero(n, n);
    Vec b = Vec::Zero(n);
    double c = 0.0;
    H.block(0, 0, d_theta_, d_theta_) =
        static_cast<double>(num_data_) * block_hessian_.block(0, 0, d_theta_, d_theta_);
    for (Eigen::Index m = 0; m < num_data_; ++m) {
        const Eigen::Index off = d_theta_ + m * block_d_x_;
        H.block(0, off, d_theta_, block_d_x_) =
            block_hessian_.block(0, d_theta_, d_theta_, block_d_x_);
        H.block(off, 0, block_d_x_, d_theta_) =
            block_hessian_.block(d_theta_, 0, block_d_x_, d_theta_);
        H.block(off, off, block_d_x_, block_d_x_) =
            block_hessian_.block(d_theta_, d_theta_, block_d_x_, block_d_x_);
        const Vec bm = block_linear(m);
        b.head(d_theta_) += bm.head(d_theta_);
        b.segment(off, block_d_x_) = bm.tail(block_d_x_);
        c += block_constant(m);
    }
    return QuadraticModel(d_theta_, std::move(H), std::move(b), c);
}

// ---------------------------------------------------------------------------
// LogisticModel

namespace {
inline double softplus(double s) {
    return std::log1p(std::exp(-std::fabs(s))) + std::max(s, 0.0);
}
} // namespace

LogisticModel::LogisticModel(Mat design, Vec labels, double prior_precision_theta,
                             double prior_precision_x)
    : design_(std::move(design)),
      labels_(std::move(labels)),
      prec_theta_(prior_precision_theta),
      prec_x_(prior_precision_x) {
    if (labels_.size() != design_.rows())
        throw_config("LogisticModel: label count must match design rows");
    for (Eigen::Index j = 0; j < labels_.size(); ++j)
        if (labels_(j) != 0.0 && labels_(j) != 1.0)
            throw_config("LogisticModel: labels must be 0 or 1");
    if (prec_theta_ <= 0.0 || prec_x_ <= 0.0)
        throw_config("LogisticModel: prior precisions must be positive");
}

double LogisticModel::log_lik(VecCRef theta, VecCRef x) const {
    require_dims(theta, x);
    const Vec s = design_ * x;
    double ll = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        // t log sigmoid(s) + (1-t) log(1 - sigmoid(s)) = t s - softplus(s)
        ll += labels_(j) * s(j) - softplus(s(j));
    }
    ll -= 0.5 * prec_x_ * (x - theta).squaredNorm();
    ll -= 0.5 * prec_theta_ * theta.squaredNorm();
    return ll;
}

void LogisticModel::grad(VecCRef theta, VecCRef x, Eigen::Ref<Vec> g_theta,
                         Eigen::Ref<Vec> g_x) const {
    require_dims(theta, x);
    const Vec s = design_ * x;
    Vec resid(s.size());
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        const double sig = 1.0 / (1.0 + std::exp(-s(j)));
        resid(j) = labels_(j) - sig;
    }
    g_x.noalias() = design_.transpose() * resid;
    g_x -= prec_x_ * (x - theta);
    g_theta = prec_x_ * (x - theta) - prec_theta_ * theta;
}

// ---------------------------------------------------------------------------
// Factories

namespace models {

QuadraticModel toy_1d(double y) {
    Mat H(2, 2);
    H << -1.0, 1.0, 1.0, -2.0;
    Vec b(2);
    b << 0.0, y;
    const double c = -0.5 * y * y - std::log(2.0 * std::numbers::pi);
    return QuadraticModel(1, H, b, c);
}

QuadraticModel example_3d() {
    Mat negH(3, 3);
    negH << 1.5, -0.4, 0.3,
           -0.4, 1.2, -0.5,
            0.3, -0.5, 2.0;
    Vec b(3);
    b << 0.2, -0.3, 0.5;
    return QuadraticModel(1, Mat(-negH), b, 0.0);
}

FactorizedGaussianModel factorized_toy(const Vec& ys) {
    Mat Hb(2, 2);
    Hb << -1.0, 1.0, 1.0, -2.0;
    Vec base = Vec::Zero(2);
    Mat coupling(2, 1);
    coupling << 0.0, 1.0;
    Mat obs(ys.size(), 1);
    obs.col(0) = ys;
    return FactorizedGaussianModel(1, 1, Hb, base, coupling, -std::log(2.0 * std::numbers::pi),
                                   obs);
}

} // namespace models

} // namespace pgd
