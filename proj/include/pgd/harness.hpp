#ifndef PGD_HARNESS_HPP
#define PGD_HARNESS_HPP

#include <string>
#include <vector>

#include "pgd/config.hpp"

namespace pgd {

struct CmdResult {
    std::vector<std::string> csv_paths;
    std::vector<std::string> svg_paths;
    bool pass = true;     // false => CLI exits 3 (audit / inequality failure)
    std::string summary;  // single-line human summary for stdout
};

// Scan pinning: keeps the non-swept terms of the error bound at least an
// order of magnitude below the swept one on the reference model.
namespace pinning {

constexpr double kNScanStep = 1e-3;
constexpr double kKScanStep = 1e-2;
constexpr Eigen::Index kScanParticles = 8192;
constexpr Eigen::Index kMScanParticles = 1024;
// m-scan step sizes follow h = kMScanStepTimesM / M (the h ~ 1/M coupling of
// the per-datapoint bound).
constexpr double kMScanStepTimesM = 0.12;

// ceil(12 / (h lambda)): enough steps that the e^{-h lambda K} term is
// negligible against the others.
long stationarity_steps(double h, double lambda);
// Shorter budget used by the m-scan, which only needs stationarity.
long mscan_steps(double h, double lambda);

} // namespace pinning

CmdResult cmd_run(const ExperimentSpec& spec);
CmdResult cmd_scan(const ExperimentSpec& spec);
CmdResult cmd_flow(const ExperimentSpec& spec);
CmdResult cmd_check_inequalities(const ExperimentSpec& spec);
CmdResult cmd_bound_audit(const ExperimentSpec& spec);

// Dispatch by command name ("run", "scan", "flow", "check-inequalities",
// "bound-audit").
CmdResult run_command(const std::string& command, const ExperimentSpec& spec);

} // namespace pgd

#endif
