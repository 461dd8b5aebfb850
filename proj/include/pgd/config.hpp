#ifndef PGD_CONFIG_HPP
#define PGD_CONFIG_HPP

#include <memory>
#include <string>

#include "pgd/model.hpp"
#include "pgd/sampler.hpp"
#include "pgd/toml.hpp"

namespace pgd {

enum class ModelKind { Quadratic, FactorizedGaussian, Logistic };

struct LoadedModel {
    std::shared_ptr<LatentModel> model;
    ModelKind kind = ModelKind::Quadratic;

    const QuadraticModel* as_quadratic() const {
        return dynamic_cast<const QuadraticModel*>(model.get());
    }
    const FactorizedGaussianModel* as_factorized() const {
        return dynamic_cast<const FactorizedGaussianModel*>(model.get());
    }
};

// [model] table: kind = "quadratic" | "factorized_gaussian" | "logistic",
// plus the shortcut kinds "toy_1d", "example_3d", "factorized_toy".
LoadedModel load_model(const toml::Table& table);

// [run]/[scan] style tables: algorithm, h, n, k, init and friends.
RunConfig load_run_config(const toml::Table& table, const LatentModel& model,
                          std::uint64_t default_seed);

// Parsed experiment file plus the CLI-level knobs that may override it.
struct ExperimentSpec {
    LoadedModel model;
    toml::Document doc;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int replicates = 50;
    int workers = 1;
};

ExperimentSpec load_experiment(const std::string& config_path);

} // namespace pgd

#endif
