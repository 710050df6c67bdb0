#pragma once

#include "rsport/cli/toml_lite.hpp"
#include "rsport/hjb_ode.hpp"
#include "rsport/hybridsim.hpp"
#include "rsport/market.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rsport::cli {

struct MarketBlock {
    std::size_t regimes = 1;
    std::size_t assets = 1;
    std::size_t canonical_dims = 1;
    double horizon = 1.0;
    Eigen::MatrixXd generator;
    std::vector<RegimeCoefficients> coefficients;
};

struct UtilityBlock {
    double kappa = 2.0;
    double beta = 0.0;
};

struct SolverBlock {
    std::size_t steps = kDefaultSolverSteps;
};

struct SimulationBlock {
    std::size_t n_paths = 100000;
    std::size_t steps = 1000;
    std::size_t alpha_nodes = 16;
    std::uint64_t seed = 1;
    double x0 = 1.0;
    std::size_t i0 = 1;  ///< 1-based regime label
};

struct OutputBlock {
    std::string directory = "out";
    std::string prefix;
};

/// Full specification of one CLI run.
struct ExperimentConfig {
    std::string name;
    MarketBlock market;
    UtilityBlock utility;
    SolverBlock solver;
    SimulationBlock simulation;
    OutputBlock output;

    RegimeMarket build_market() const;
    UtilitySpec build_utility() const;
    SimulationOptions simulation_options(std::size_t threads) const;
    std::size_t initial_regime() const { return simulation.i0 - 1; }
    /// True when every η_i is identically zero.
    bool zero_uncertain_volatility() const;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parses and validates. Domain validation failures (bad generator,
/// non-PD volatility, invalid utility) are reported as ConfigError naming
/// the offending field and line.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes the config back in the same format; parse_config inverts it exactly.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace rsport::cli
