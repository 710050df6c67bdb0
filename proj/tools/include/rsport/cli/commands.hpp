#pragma once

#include "rsport/cli/config.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rsport::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitNumerical = 2,
    kExitVerification = 3,
};

struct RunOptions {
    std::filesystem::path out_dir;
    std::size_t threads = 1;
};

/// `<out_dir>/<prefix><name>`.
std::filesystem::path output_file(const ExperimentConfig& cfg, const RunOptions& run,
                                  const std::string& name);

/// 12 significant digits, as used by every CSV the CLI writes.
std::string format_csv_number(double x);

/// Writes solution.csv (t, A_1..A_S) and rho.csv (regime, rho).
std::vector<std::filesystem::path> cmd_solve(const ExperimentConfig& cfg, const RunOptions& run);

/// Writes consumption_ratio.csv (t, c_over_w_1..S = 1/A_i(t)) and
/// portfolio.csv (regime, pi_1..pi_m).
std::vector<std::filesystem::path> cmd_figures(const ExperimentConfig& cfg, const RunOptions& run);

/// Runs the closed-loop wealth simulation and writes simulation.json.
std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& cfg, const RunOptions& run);

struct CheckResult {
    std::string check;
    bool pass = false;
    double metric = 0.0;
    std::optional<double> tolerance;  ///< absent for exploratory measurements
    std::string detail;
};

/// Every verification check for the config, without touching the filesystem.
std::vector<CheckResult> run_verification(const ExperimentConfig& cfg, std::size_t threads);

struct VerifyOutcome {
    std::vector<CheckResult> checks;
    std::filesystem::path report;
    bool all_pass() const;
};

/// Runs the verification suite and writes verify.json.
VerifyOutcome cmd_verify(const ExperimentConfig& cfg, const RunOptions& run);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace rsport::cli
