#include "rsport/cli/commands.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace rsport::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = RSPORT_CONFIG_DIR;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rsport_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "rsport");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

// Copy of a shipped config with one line replaced.
fs::path edited_config(const fs::path& dir, const std::string& base, const std::string& from,
                       const std::string& to) {
    std::string text = slurp(kConfigDir / base);
    const auto pos = text.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    text.replace(pos, from.size(), to);
    const fs::path out = dir / base;
    std::ofstream(out) << text;
    return out;
}

}  // namespace

TEST(Cli, SolveWritesSolutionAndRho) {
    const auto dir = scratch("solve");
    ASSERT_EQ(run({"solve", "--config", (kConfigDir / "figure1.toml").string(), "--out", dir.string()}), 0);
    const auto rows = read_csv(dir / "solution.csv");
    ASSERT_EQ(rows.size(), 2002u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "A_1", "A_2"}));
    EXPECT_EQ(rows.back(), (std::vector<std::string>{"1", "1", "1"}));
    EXPECT_EQ(rows[1][0], "0");
    const auto rho = read_csv(dir / "rho.csv");
    ASSERT_EQ(rho.size(), 3u);
    EXPECT_EQ(rho[0], (std::vector<std::string>{"regime", "rho"}));
    EXPECT_NEAR(std::stod(rho[1][1]), 1.792, 1e-11);
}

TEST(Cli, FiguresWriteConsumptionRatioContract) {
    const auto dir = scratch("figures");
    ASSERT_EQ(run({"figures", "--config", (kConfigDir / "figure2.toml").string(), "--out", dir.string()}), 0);
    const auto rows = read_csv(dir / "consumption_ratio.csv");
    EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "c_over_w_1", "c_over_w_2"}));
    EXPECT_EQ(rows.back()[1], "1");
    EXPECT_EQ(rows.back()[2], "1");
    for (std::size_t k = 2; k < rows.size(); ++k) {
        EXPECT_LE(std::stod(rows[k][1]), std::stod(rows[k][2]));
    }
    const auto pf = read_csv(dir / "portfolio.csv");
    EXPECT_EQ(pf[0], (std::vector<std::string>{"regime", "pi_1"}));
    EXPECT_NEAR(std::stod(pf[2][1]), 0.4 / (0.7 * 0.6), 1e-11);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
    const auto a = scratch("repro_a");
    const auto b = scratch("repro_b");
    const auto cfg = edited_config(a, "merton.toml", "n_paths = 100000", "n_paths = 3000");
    for (const auto& d : {a, b}) {
        ASSERT_EQ(run({"solve", "--config", cfg.string(), "--out", d.string()}), 0);
        ASSERT_EQ(run({"figures", "--config", cfg.string(), "--out", d.string()}), 0);
        ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", d.string(), "--threads",
                       d == a ? "1" : "2"}),
                  0);
    }
    for (const char* f : {"solution.csv", "rho.csv", "consumption_ratio.csv", "portfolio.csv", "simulation.json"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
}

TEST(Cli, SimulateReportAndSeedOverride) {
    const auto dir = scratch("simulate");
    const auto cfg = edited_config(dir, "merton.toml", "n_paths = 100000", "n_paths = 2000");
    ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", dir.string(), "--seed", "99"}), 0);
    const auto j = nlohmann::json::parse(slurp(dir / "simulation.json"));
    EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 99u);
    EXPECT_EQ(j.at("n_random_paths").get<std::size_t>(), 2000u);
    EXPECT_GT(j.at("std_error").get<double>(), 0.0);
    EXPECT_TRUE(j.contains("closed_form_value"));
    EXPECT_TRUE(j.at("zero_uncertain_volatility").get<bool>());
}

TEST(Cli, CorruptedGeneratorExitsWithConfigError) {
    const auto dir = scratch("corrupt");
    const auto cfg = edited_config(dir, "figure1.toml", "[2.5, -2.5]", "[2.5, -2.4]");
    EXPECT_EQ(run({"verify", "--config", cfg.string(), "--out", dir.string()}), kExitConfig);
    EXPECT_EQ(run({"solve", "--config", cfg.string(), "--out", dir.string()}), kExitConfig);
    EXPECT_FALSE(fs::exists(dir / "verify.json"));
}

TEST(Cli, UsageErrorsExitWithConfigError) {
    EXPECT_EQ(run({"solve"}), kExitConfig);
    EXPECT_EQ(run({"launch", "--config", "x.toml"}), kExitConfig);
    EXPECT_EQ(run({"solve", "--config", "/nonexistent/file.toml"}), kExitConfig);
    EXPECT_EQ(run({"solve", "--config", (kConfigDir / "figure1.toml").string(), "--threads", "0"}), kExitConfig);
}

TEST(Cli, NumericalFailureExitCode) {
    const auto dir = scratch("numeric");
    auto cfg = edited_config(dir, "merton.toml", "kappa = 3.0", "kappa = 0.01");
    std::string text = slurp(cfg);
    text.replace(text.find("expected_return = [0.08]"), 24, "expected_return = [4.0]");
    text.replace(text.find("volatility = [[0.2]]"), 20, "volatility = [[1.0]]");
    std::ofstream(cfg) << text;
    EXPECT_EQ(run({"solve", "--config", cfg.string(), "--out", dir.string()}), kExitNumerical);
}

TEST(Cli, CoarseSolverFailsHjbResidualCheck) {
    const auto dir = scratch("coarse");
    auto cfg = edited_config(dir, "figure1.toml", "steps = 2000", "steps = 10");
    std::string text = slurp(cfg);
    text.replace(text.find("n_paths = 100000"), 16, "n_paths = 2000");
    std::ofstream(cfg) << text;
    EXPECT_EQ(run({"verify", "--config", cfg.string(), "--out", dir.string()}), kExitVerification);
    const auto report = nlohmann::json::parse(slurp(dir / "verify.json"));
    ASSERT_TRUE(report.is_array());
    bool found = false;
    for (const auto& c : report) {
        ASSERT_TRUE(c.contains("check") && c.contains("pass") && c.contains("metric") && c.contains("tolerance"));
        if (c.at("check") == "hjb_residual") {
            found = true;
            EXPECT_FALSE(c.at("pass").get<bool>());
            EXPECT_GT(c.at("metric").get<double>(), 1e-5);
        }
        if (c.at("check") == "terminal_condition") EXPECT_TRUE(c.at("pass").get<bool>());
    }
    EXPECT_TRUE(found);
}

TEST(Cli, ShippedFigure1VerifyPasses) {
    const auto dir = scratch("verify_figure1");
    const int code = run({"verify", "--config", (kConfigDir / "figure1.toml").string(), "--out", dir.string()});
    const auto report = nlohmann::json::parse(slurp(dir / "verify.json"));
    for (const auto& c : report) {
        EXPECT_TRUE(c.at("pass").get<bool>()) << c.at("check") << " metric=" << c.at("metric");
    }
    EXPECT_EQ(code, kExitOk);
}
