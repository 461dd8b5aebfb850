#include "pgd/config.hpp"

#include "pgd/errors.hpp"
#include "pgd/parallel.hpp"

namespace pgd {

namespace {

Mat reshape_flat(const std::vector<double>& flat, Eigen::Index rows, Eigen::Index cols,
                 const std::string& what) {
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw_config("model config: " + what + " has " + std::to_string(flat.size()) +
                     " entries, expected " + std::to_string(rows * cols));
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = flat[static_cast<std::size_t>(i * cols + j)];
    return m;
}

} // namespace

LoadedModel load_model(const toml::Table& table) {
    const std::string kind = table.get_string("kind");
    LoadedModel out;
    if (kind == "quadratic") {
        const Mat h = table.get_mat("hessian");
        const Vec b = table.get_vec("linear");
        const double c = table.get_double("constant", 0.0);
        const auto d_theta = static_cast<Eigen::Index>(table.get_int("d_theta"));
        out.model = std::make_shared<QuadraticModel>(d_theta, h, b, c);
        out.kind = ModelKind::Quadratic;
    } else if (kind == "toy_1d") {
        out.model = std::make_shared<QuadraticModel>(models::toy_1d(table.get_double("y", 1.0)));
        out.kind = ModelKind::Quadratic;
    } else if (kind == "example_3d") {
        out.model = std::make_shared<QuadraticModel>(models::example_3d());
        out.kind = ModelKind::Quadratic;
    } else if (kind == "factorized_gaussian") {
        const auto d_theta = static_cast<Eigen::Index>(table.get_int("d_theta"));
        const auto block_d_x = static_cast<Eigen::Index>(table.get_int("block_d_x"));
        const Mat hb = table.get_mat("block_hessian");
        Vec base;
        if (table.has("block_linear")) {
            base = table.get_vec("block_linear");
        } else {
            base = Vec::Zero(d_theta + block_d_x);
        }
        const Mat coupling = table.get_mat("obs_coupling");
        const double c_base = table.get_double("block_constant", 0.0);
        const auto flat = table.get_double_list("observations");
        const Eigen::Index obs_dim = coupling.cols();
        if (obs_dim < 1 || static_cast<Eigen::Index>(flat.size()) % obs_dim != 0)
            throw_config("model config: observations length must be a multiple of the "
                         "observation dimension");
        const Eigen::Index m = static_cast<Eigen::Index>(flat.size()) / obs_dim;
        const Mat obs = reshape_flat(flat, m, obs_dim, "observations");
        out.model = std::make_shared<FactorizedGaussianModel>(d_theta, block_d_x, hb, base,
                                                              coupling, c_base, obs);
        out.kind = ModelKind::FactorizedGaussian;
    } else if (kind == "factorized_toy") {
        const Vec ys = table.get_vec("observations");
        out.model = std::make_shared<FactorizedGaussianModel>(models::factorized_toy(ys));
        out.kind = ModelKind::FactorizedGaussian;
    } else if (kind == "logistic") {
        const Mat design = table.get_mat("design");
        const Vec labels = table.get_vec("labels");
        const double pt = table.get_double("prior_precision_theta");
        const double px = table.get_double("prior_precision_x");
        out.model = std::make_shared<LogisticModel>(design, labels, pt, px);
        out.kind = ModelKind::Logistic;
    } else {
        throw_config("model config: unknown kind '" + kind + "'");
    }
    return out;
}

RunConfig load_run_config(const toml::Table& table, const LatentModel& model,
                          std::uint64_t default_seed) {
    RunConfig cfg;
    cfg.h = table.get_double("h");
    cfg.n_particles = static_cast<Eigen::Index>(table.get_int("n"));
    cfg.k_steps = table.get_int("k");
    cfg.seed = table.has("seed") ? static_cast<std::uint64_t>(table.get_int("seed"))
                                 : default_seed;
    cfg.record_every = table.get_int("record_every", 0);
    cfg.record_full_particles = table.get_bool("record_full_particles", false);

    const std::string alg = table.get_string("algorithm", "pgd");
    if (alg == "pgd") {
        cfg.algorithm = Algorithm::PGD;
    } else if (alg == "ipla") {
        cfg.algorithm = Algorithm::IPLA;
    } else {
        throw_config("run config: unknown algorithm '" + alg + "'");
    }

    const std::string init = table.get_string("init", "warm_start");
    if (init == "warm_start") {
        cfg.init = WarmStartInit{};
    } else if (init == "gaussian") {
        GaussianInit g;
        g.theta0 = table.has("init_theta") ? table.get_vec("init_theta")
                                           : Vec::Zero(model.dim_theta());
        Vec mean = table.has("init_mean") ? table.get_vec("init_mean")
                                          : Vec::Zero(model.dim_x());
        Mat cov = table.has("init_cov")
                      ? table.get_mat("init_cov")
                      : Mat(Mat::Identity(model.dim_x(), model.dim_x()));
        g.q0 = GaussianMeasure(mean, cov);
        cfg.init = std::move(g);
    } else if (init == "explicit") {
        ExplicitInit e;
        e.state.theta = table.get_vec("init_theta");
        const auto flat = table.get_double_list("init_particles");
        const Eigen::Index d_x = model.dim_x();
        if (static_cast<Eigen::Index>(flat.size()) != cfg.n_particles * d_x)
            throw_config("run config: init_particles must hold n * d_x values");
        e.state.particles.resize(cfg.n_particles, d_x);
        for (Eigen::Index i = 0; i < cfg.n_particles; ++i)
            for (Eigen::Index j = 0; j < d_x; ++j)
                e.state.particles(i, j) = flat[static_cast<std::size_t>(i * d_x + j)];
        cfg.init = std::move(e);
    } else {
        throw_config("run config: unknown init '" + init + "'");
    }
    return cfg;
}

ExperimentSpec load_experiment(const std::string& config_path) {
    ExperimentSpec spec;
    spec.doc = toml::parse_file(config_path);
    if (!spec.doc.has_table("model"))
        throw_config("experiment config: missing [model] table");
    spec.model = load_model(spec.doc.table("model"));
    spec.seed = static_cast<std::uint64_t>(spec.doc.root.get_int("seed", 0));
    spec.out_dir = spec.doc.root.get_string("out", ".");
    spec.replicates = static_cast<int>(spec.doc.root.get_int("replicates", 50));
    spec.workers = static_cast<int>(spec.doc.root.get_int("workers", default_workers()));
    if (spec.replicates < 1) throw_config("experiment config: replicates must be >= 1");
    if (spec.workers < 1) throw_config("experiment config: workers must be >= 1");
    return spec;
}

} // namespace pgd
