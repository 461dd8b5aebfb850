#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pgd/errors.hpp"
#include "pgd/harness.hpp"

namespace {

struct Options {
    std::string config_path;
    std::string out_dir;
    bool out_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replicates = 0;
    bool replicates_set = false;
    int workers = 0;
    bool workers_set = false;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "experiment TOML file")->required();
    cmd->add_option("--out", opt.out_dir, "output directory")->each([&](const std::string&) {
        opt.out_set = true;
    });
    cmd->add_option("--seed", opt.seed, "base seed")->each([&](const std::string&) {
        opt.seed_set = true;
    });
    cmd->add_option("--replicates", opt.replicates, "replicate count")
        ->each([&](const std::string&) { opt.replicates_set = true; });
    cmd->add_option("--workers", opt.workers, "worker thread count")
        ->each([&](const std::string&) { opt.workers_set = true; });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pgd-lab: particle gradient descent experiments"};
    app.require_subcommand(1);

    Options opt;
    const char* names[] = {"run", "scan", "flow", "check-inequalities", "bound-audit"};
    for (const char* name : names) add_common(app.add_subcommand(name), opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();

    try {
        pgd::ExperimentSpec spec = pgd::load_experiment(opt.config_path);
        if (opt.out_set) spec.out_dir = opt.out_dir;
        if (opt.seed_set) spec.seed = opt.seed;
        if (opt.replicates_set) spec.replicates = opt.replicates;
        if (opt.workers_set) spec.workers = opt.workers;
        if (const char* env = std::getenv("PGD_LAB_WORKERS")) {
            const int w = std::atoi(env);
            if (w >= 1) spec.workers = w;
        }
        if (spec.replicates < 1) pgd::throw_config("replicates must be >= 1");
        if (spec.workers < 1) pgd::throw_config("workers must be >= 1");

        const pgd::CmdResult result = pgd::run_command(command, spec);
        std::cout << result.summary << "\n";
        for (const auto& p : result.csv_paths) std::cout << "wrote " << p << "\n";
        for (const auto& p : result.svg_paths) std::cout << "wrote " << p << "\n";
        return result.pass ? 0 : 3;
    } catch (const pgd::Error& e) {
        std::cerr << "pgd-lab: " << e.what() << "\n";
        return e.kind() == pgd::ErrorKind::Config ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "pgd-lab: " << e.what() << "\n";
        return 1;
    }
}
