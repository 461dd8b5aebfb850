#include "pgd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pgd/errors.hpp"
#include "pgd/parallel.hpp"
#include "pgd/rng.hpp"
#include "pgd/stats.hpp"

namespace pgd {

namespace {

constexpr Eigen::Index kAssignmentCap = 4096;

// Shortest-augmenting-path assignment (Jonker-Volgenant / classic Hungarian
// with potentials), O(N^3). Returns col[i] = column matched to row i.
std::vector<int> solve_assignment(const Mat& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                                   v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] != 0)
            col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
    return col;
}

} // namespace

double w2_empirical(const PointCloud& a, const PointCloud& b) {
    if (a.cols() != b.cols()) throw_config("w2_empirical: dimension mismatch");
    if (a.rows() != b.rows())
        throw_unsupported("w2_empirical: unequal sample sizes are not supported");
    const Eigen::Index n = a.rows();
    if (n < 1) throw_config("w2_empirical: empty cloud");
    if (!a.allFinite() || !b.allFinite()) throw_config("w2_empirical: non-finite input");

    if (a.cols() == 1) {
        std::vector<double> xs(a.data(), a.data() + n);
        std::vector<double> ys(b.data(), b.data() + n);
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = xs[static_cast<std::size_t>(i)] - ys[static_cast<std::size_t>(i)];
            sum += d * d;
        }
        return std::sqrt(sum / static_cast<double>(n));
    }

    // The cap guards the cubic assignment path; sorted pairing above has no
    // such limit.
    if (n > kAssignmentCap)
        throw_unsupported("w2_empirical: N exceeds the 4096-point assignment cap");
    Mat cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
    const auto col = solve_assignment(cost);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) sum += cost(i, col[static_cast<std::size_t>(i)]);
    return std::sqrt(sum / static_cast<double>(n));
}

double w2_cloud_to_gaussian_1d(const PointCloud& a, double mean, double sd) {
    if (a.cols() != 1) throw_config("w2_cloud_to_gaussian_1d: cloud must be one-dimensional");
    if (a.rows() < 1) throw_config("w2_cloud_to_gaussian_1d: empty cloud");
    if (!(sd > 0.0)) throw_degenerate("w2_cloud_to_gaussian_1d: sd must be positive");
    const Eigen::Index n = a.rows();
    std::vector<double> xs(a.data(), a.data() + n);
    std::sort(xs.begin(), xs.end());

    // Quantiles pinned away from {0,1}; the trimmed tail mass contributes
    // O(1e-16 * z^2), far below the 1e-8 tolerance.
    const double u_min = 1e-16;
    const double tol_per_interval = 1e-8 / static_cast<double>(n);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = std::max(u_min, static_cast<double>(i) / static_cast<double>(n));
        const double hi =
            std::min(1.0 - u_min, static_cast<double>(i + 1) / static_cast<double>(n));
        const double xi = xs[static_cast<std::size_t>(i)];
        total += stats::adaptive_simpson(
            [&](double u) {
                const double g = mean + sd * stats::norm_ppf(u);
                const double d = xi - g;
                return d * d;
            },
            lo, hi, tol_per_interval);
    }
    return std::sqrt(std::max(0.0, total));
}

double w2_cloud_to_gaussian_1d(const PointCloud& a, const GaussianMeasure& g) {
    if (g.dim() != 1) throw_config("w2_cloud_to_gaussian_1d: measure must be one-dimensional");
    return w2_cloud_to_gaussian_1d(a, g.mean(0), std::sqrt(g.cov(0, 0)));
}

namespace {

SlopeFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += xs[static_cast<std::size_t>(i)];
        sy += ys[static_cast<std::size_t>(i)];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = xs[static_cast<std::size_t>(i)] - mx;
        const double dy = ys[static_cast<std::size_t>(i)] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw_config("slope fit: x values must not be constant");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = (syy <= 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    fit.n_points = n;
    return fit;
}

} // namespace

SlopeFit loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw_config("loglog_slope: need at least three (x, y) pairs");
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw_config("loglog_slope: inputs must be strictly positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    return least_squares(lx, ly);
}

SlopeFit exp_rate_fit(const std::vector<double>& ts, const std::vector<double>& ys) {
    if (ts.size() != ys.size() || ts.size() < 3)
        throw_config("exp_rate_fit: need at least three (t, y) pairs");
    std::vector<double> ly(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(ys[i] > 0.0)) throw_config("exp_rate_fit: y values must be strictly positive");
        ly[i] = std::log(ys[i]);
    }
    return least_squares(ts, ly);
}

std::pair<Vec, GaussianMeasure> analytic_optimum_of(const LatentModel& model) {
    if (const auto* q = dynamic_cast<const QuadraticModel*>(&model)) return q->analytic_optimum();
    if (const auto* f = dynamic_cast<const FactorizedGaussianModel*>(&model))
        return f->analytic_optimum();
    throw_unsupported("model has no analytic optimum");
}

DRandomEstimate d_random_estimate(const RunConfig& config, const LatentModel& model,
                                  int replicates, int workers) {
    if (replicates < 2) throw_config("d_random_estimate: need at least two replicates");
    const auto [theta_star, pi_star] = analytic_optimum_of(model);

    struct ReplicateResult {
        double theta_sq = 0.0;
        double w2_sq = 0.0;
    };
    const auto results = parallel_map(replicates, workers, [&](int r) {
        RunConfig local = config;
        local.seed = rng::derive_seed(config.seed, /*tag=*/1, static_cast<std::uint64_t>(r));
        local.record_every = 0;
        local.record_full_particles = false;
        const Trajectory traj = run(local, model);
        const ParticleState& fin = traj.final_state;

        const std::uint64_t qseed = rng::derive_seed(local.seed, /*tag=*/2, 0);
        PointCloud reference(fin.num_particles(), model.dim_x());
        for (Eigen::Index i = 0; i < fin.num_particles(); ++i)
            reference.row(i) =
                pi_star.sample(qseed, static_cast<std::uint32_t>(i), rng::Stream::Init)
                    .transpose();

        ReplicateResult res;
        res.theta_sq = (fin.theta - theta_star).squaredNorm();
        const double w2 = w2_empirical(PointCloud(fin.particles), reference);
        res.w2_sq = w2 * w2;
        return res;
    });

    double mean_v = 0.0, mean_theta = 0.0, mean_w2 = 0.0;
    for (const auto& r : results) {
        mean_v += r.theta_sq + r.w2_sq;
        mean_theta += r.theta_sq;
        mean_w2 += r.w2_sq;
    }
    const double nr = static_cast<double>(replicates);
    mean_v /= nr;
    mean_theta /= nr;
    mean_w2 /= nr;
    double var_v = 0.0;
    for (const auto& r : results) {
        const double d = (r.theta_sq + r.w2_sq) - mean_v;
        var_v += d * d;
    }
    var_v /= (nr - 1.0);

    DRandomEstimate out;
    out.replicates = replicates;
    out.estimate = std::sqrt(mean_v);
    out.theta_rms = std::sqrt(mean_theta);
    out.w2_rms = std::sqrt(mean_w2);
    const double se_mean = std::sqrt(var_v / nr);
    out.std_error = (out.estimate > 0.0) ? se_mean / (2.0 * out.estimate) : 0.0;
    return out;
}

} // namespace pgd
