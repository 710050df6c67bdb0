#include "rsport/cli/config.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace rsport::cli;

namespace {

const std::filesystem::path kConfigDir = RSPORT_CONFIG_DIR;

const char* kMinimal = R"(name = "tiny"

[market]
regimes = 2
horizon = 1.0
generator = [[-1.2, 1.2],
             [2.5, -2.5]]

[market.regime.1]
rate = 0.05
expected_return = [0.15]
volatility = [[0.25]]

[market.regime.2]
rate = 0.01
expected_return = 0.25
volatility = 0.6

[utility]
kappa = 10.0
beta = 0.07
)";

// Replaces the first occurrence of `from` in the minimal config.
std::string variant(const std::string& from, const std::string& to) {
    std::string s = kMinimal;
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return s.replace(pos, from.size(), to);
}

ConfigError parse_error(const std::string& text) {
    try {
        parse_config(text, "test.toml");
    } catch (const ConfigError& e) {
        return e;
    }
    ADD_FAILURE() << "expected ConfigError";
    return ConfigError("", 0, "", "");
}

}  // namespace

TEST(Config, ShippedConfigsLoad) {
    const auto f1 = load_config(kConfigDir / "figure1.toml");
    EXPECT_EQ(f1.name, "figure1");
    EXPECT_EQ(f1.market.regimes, 2u);
    EXPECT_EQ(f1.utility.kappa, 10.0);
    EXPECT_EQ(f1.utility.beta, 0.07);
    EXPECT_EQ(f1.market.generator(1, 0), 2.5);
    EXPECT_EQ(f1.market.coefficients[1].volatility(0, 0), 0.6);
    EXPECT_TRUE(f1.zero_uncertain_volatility());

    const auto f2 = load_config(kConfigDir / "figure2.toml");
    EXPECT_EQ(f2.utility.kappa, 0.7);
    EXPECT_EQ(f2.utility.beta, 0.8);

    const auto eta = load_config(kConfigDir / "figure1_eta.toml");
    EXPECT_FALSE(eta.zero_uncertain_volatility());
    EXPECT_EQ(eta.market.coefficients[0].uncertain_vol(0, 0), 0.05);

    const auto merton = load_config(kConfigDir / "merton.toml");
    EXPECT_EQ(merton.market.regimes, 1u);
}

TEST(Config, DefaultsAndScalarPromotion) {
    const auto cfg = parse_config(kMinimal);
    EXPECT_EQ(cfg.solver.steps, 2000u);
    EXPECT_EQ(cfg.simulation.n_paths, 100000u);
    EXPECT_EQ(cfg.simulation.alpha_nodes, 16u);
    EXPECT_EQ(cfg.simulation.i0, 1u);
    EXPECT_EQ(cfg.market.coefficients[1].expected_return(0), 0.25);
    EXPECT_EQ(cfg.market.coefficients[1].uncertain_vol(0, 0), 0.0);
    EXPECT_EQ(cfg.initial_regime(), 0u);
    EXPECT_EQ(cfg.build_market().regimes(), 2u);
}

TEST(Config, RoundTripIsExact) {
    for (const char* name : {"figure1.toml", "figure2.toml", "figure1_eta.toml", "merton.toml"}) {
        const auto cfg = load_config(kConfigDir / name);
        const auto text = serialize_config(cfg);
        const auto again = parse_config(text, name);
        EXPECT_TRUE(cfg == again) << name;
        EXPECT_EQ(serialize_config(again), text) << name;
    }
}

TEST(Config, RoundTripPreservesAwkwardValues) {
    auto cfg = parse_config(kMinimal);
    cfg.simulation.seed = 18446744073709551557ULL;
    cfg.market.coefficients[0].rate = 0.1 + 0.2;
    cfg.utility.beta = 1e-300;
    cfg.output.prefix = "run \"a\"\\b_";
    const auto again = parse_config(serialize_config(cfg));
    EXPECT_TRUE(cfg == again);
    EXPECT_EQ(again.simulation.seed, 18446744073709551557ULL);
}

TEST(Config, CorruptedGeneratorNamesFieldAndLine) {
    const auto e = parse_error(variant("[2.5, -2.5]", "[2.5, -2.0]"));
    EXPECT_EQ(e.field(), "market.generator");
    EXPECT_EQ(e.line(), 6u);
    EXPECT_NE(std::string(e.what()).find("test.toml"), std::string::npos);
}

TEST(Config, ValidationErrors) {
    EXPECT_EQ(parse_error(variant("volatility = 0.6", "volatility = 0.0")).field(), "market.regime.2.volatility");
    EXPECT_EQ(parse_error(variant("kappa = 10.0", "kappa = 1.0")).field(), "utility");
    EXPECT_EQ(parse_error(variant("horizon = 1.0", "horizon = -1.0")).field(), "market.horizon");
    EXPECT_EQ(parse_error(variant("rate = 0.05\n", "rate = 0.05\nspin = 2\n")).field(), "market.regime.1.spin");
    EXPECT_EQ(parse_error(variant("beta = 0.07", "")).field(), "utility.beta");
    EXPECT_EQ(parse_error(std::string(kMinimal) + "[solvr]\nsteps = 100\n").field(), "solvr");
    EXPECT_EQ(parse_error(std::string(kMinimal) + "[solver]\nsteps = 9\n").field(), "solver.steps");
    EXPECT_EQ(parse_error(std::string(kMinimal) + "[solver]\nsteps = 2.5\n").field(), "solver.steps");
    EXPECT_EQ(parse_error(std::string(kMinimal) + "[simulation]\ni0 = 3\n").field(), "simulation.i0");
    EXPECT_EQ(parse_error(std::string(kMinimal) + "[simulation]\nalpha_nodes = 2\n").field(),
              "simulation.alpha_nodes");
    EXPECT_EQ(parse_error(std::string(kMinimal) + "[simulation]\nx0 = 0\n").field(), "simulation.x0");
    EXPECT_EQ(parse_error(variant("regimes = 2", "regimes = 3")).field(), "market.generator");
}

TEST(Config, SyntaxErrorsCarryLines) {
    EXPECT_EQ(parse_error(variant("beta = 0.07", "beta = 0.07\nbeta = 0.08")).line(), 22u);
    EXPECT_EQ(parse_error(variant("beta = 0.07", "beta = abc")).line(), 21u);
    EXPECT_GT(parse_error(variant("[[-1.2, 1.2],", "[[-1.2, 1.2,")).line(), 0u);
    EXPECT_EQ(parse_error("name = \"open\n").line(), 1u);
}

TEST(Config, MissingFileIsConfigError) {
    EXPECT_THROW(load_config(kConfigDir / "does_not_exist.toml"), ConfigError);
}
