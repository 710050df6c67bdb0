#include "rsport/cli/commands.hpp"

#include "rsport/error.hpp"
#include "rsport/hjb_ode.hpp"
#include "rsport/hybridsim.hpp"
#include "rsport/policy.hpp"
#include "rsport/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

namespace rsport::cli {

namespace fs = std::filesystem;

std::filesystem::path output_file(const ExperimentConfig& cfg, const RunOptions& run,
                                  const std::string& name) {
    const fs::path dir = run.out_dir.empty() ? fs::path(cfg.output.directory) : run.out_dir;
    return dir / (cfg.output.prefix + name);
}

std::string format_csv_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

namespace {

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path.string(), 0, "output", "cannot open for writing");
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out) throw ConfigError(path.string(), 0, "output", "write failed");
}

PolicyMap build_policy(const ExperimentConfig& cfg) {
    auto mkt = cfg.build_market();
    auto util = cfg.build_utility();
    auto grid = solve_backward(mkt, util, cfg.solver.steps);
    return PolicyMap(std::move(mkt), util, std::move(grid));
}

// Seed for one stochastic check, kept apart from the wealth simulation's
// streams so the checks are statistically independent of each other.
std::uint64_t check_seed(std::uint64_t seed, std::uint64_t tag) {
    return mix_seed(seed ^ mix_seed(tag));
}

std::vector<double> interior_times(double horizon, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) {
        t[k] = horizon * static_cast<double>(k + 1) / static_cast<double>(n + 1);
    }
    return t;
}

std::vector<double> log_wealth_grid(double lo, double hi, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
        x[k] = lo * std::pow(hi / lo, f);
    }
    return x;
}

/// |mean| in units of its standard error; zero-variance estimates count as
/// exact only when the mean is exactly zero.
double z_score(double mean, double target, double std_error) {
    const double diff = std::abs(mean - target);
    if (std_error > 0.0) return diff / std_error;
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

CheckResult bounded(std::string name, double metric, double tolerance, std::string detail = {}) {
    return {std::move(name), metric <= tolerance, metric, tolerance, std::move(detail)};
}

}  // namespace

std::vector<fs::path> cmd_solve(const ExperimentConfig& cfg, const RunOptions& run) {
    const auto mkt = cfg.build_market();
    const auto util = cfg.build_utility();
    const auto grid = solve_backward(mkt, util, cfg.solver.steps);
    const auto rho = compute_rho(mkt, util);

    std::string csv = "t";
    for (std::size_t i = 0; i < grid.regimes(); ++i) csv += ",A_" + std::to_string(i + 1);
    csv += "\n";
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        csv += format_csv_number(grid.times()[k]);
        for (std::size_t i = 0; i < grid.regimes(); ++i) csv += "," + format_csv_number(grid.value(k, i));
        csv += "\n";
    }
    const fs::path solution = output_file(cfg, run, "solution.csv");
    write_text(solution, csv);

    std::string rcsv = "regime,rho\n";
    for (std::size_t i = 0; i < rho.size(); ++i) {
        rcsv += std::to_string(i + 1) + "," + format_csv_number(rho[i]) + "\n";
    }
    const fs::path rho_path = output_file(cfg, run, "rho.csv");
    write_text(rho_path, rcsv);
    return {solution, rho_path};
}

std::vector<fs::path> cmd_figures(const ExperimentConfig& cfg, const RunOptions& run) {
    const PolicyMap pm = build_policy(cfg);
    const auto& grid = pm.grid();

    std::string csv = "t";
    for (std::size_t i = 0; i < grid.regimes(); ++i) csv += ",c_over_w_" + std::to_string(i + 1);
    csv += "\n";
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        csv += format_csv_number(grid.times()[k]);
        for (std::size_t i = 0; i < grid.regimes(); ++i) {
            csv += "," + format_csv_number(1.0 / grid.value(k, i));
        }
        csv += "\n";
    }
    const fs::path ratio = output_file(cfg, run, "consumption_ratio.csv");
    write_text(ratio, csv);

    std::string pcsv = "regime";
    for (std::size_t a = 0; a < pm.market().assets(); ++a) pcsv += ",pi_" + std::to_string(a + 1);
    pcsv += "\n";
    for (std::size_t i = 0; i < pm.regimes(); ++i) {
        pcsv += std::to_string(i + 1);
        const auto& pi = pm.optimal_portfolio(i);
        for (Eigen::Index a = 0; a < pi.size(); ++a) pcsv += "," + format_csv_number(pi(a));
        pcsv += "\n";
    }
    const fs::path portfolio = output_file(cfg, run, "portfolio.csv");
    write_text(portfolio, pcsv);
    return {ratio, portfolio};
}

std::vector<fs::path> cmd_simulate(const ExperimentConfig& cfg, const RunOptions& run) {
    const PolicyMap pm = build_policy(cfg);
    const std::size_t i0 = cfg.initial_regime();
    const double x0 = cfg.simulation.x0;
    const auto sim = simulate_wealth(pm, x0, i0, cfg.simulation_options(run.threads));
    const double v = pm.value(0.0, x0, i0);
    nlohmann::ordered_json j;
    j["objective_mean"] = sim.objective.mean;
    j["std_error"] = sim.objective.std_error;
    j["relative_std_error"] = sim.objective.std_error / std::abs(v);
    j["closed_form_value"] = v;
    j["z_score"] = z_score(sim.objective.mean, v, sim.objective.std_error);
    j["n_random_paths"] = sim.objective.n_random_paths;
    j["n_alpha_nodes"] = sim.objective.n_alpha_nodes;
    j["rejected_paths"] = sim.rejected_paths;
    j["steps"] = cfg.simulation.steps;
    j["seed"] = cfg.simulation.seed;
    j["x0"] = x0;
    j["i0"] = cfg.simulation.i0;
    j["zero_uncertain_volatility"] = cfg.zero_uncertain_volatility();
    const fs::path path = output_file(cfg, run, "simulation.json");
    write_text(path, j.dump(2) + "\n");
    return {path};
}

std::vector<CheckResult> run_verification(const ExperimentConfig& cfg, std::size_t threads) {
    std::vector<CheckResult> out;
    const PolicyMap pm = build_policy(cfg);
    const auto& grid = pm.grid();
    const auto& mkt = pm.market();
    const double horizon = mkt.horizon();
    const std::uint64_t seed = cfg.simulation.seed;

    {
        double worst = 0.0;
        const std::size_t last = grid.nodes() - 1;
        for (std::size_t i = 0; i < grid.regimes(); ++i) {
            worst = std::max(worst, std::abs(grid.value(last, i) - 1.0));
            worst = std::max(worst, std::abs(1.0 / grid.value(last, i) - 1.0));
        }
        out.push_back(bounded("terminal_condition", worst, 1e-12));
    }

    {
        const auto ts = interior_times(horizon, 50);
        const auto xs = log_wealth_grid(0.1, 10.0, 20);
        const auto rep = hjb_residual(pm, ts, xs);
        out.push_back(bounded("hjb_residual", rep.max_rel_residual, 1e-5,
                              "worst at t=" + format_csv_number(rep.worst_point.t) +
                                  " x=" + format_csv_number(rep.worst_point.x) +
                                  " regime=" + std::to_string(rep.worst_point.regime + 1)));
    }

    {
        auto rng = stream_engine(seed, 0xa11ce);
        std::uniform_real_distribution<double> tu(0.05 * horizon, 0.95 * horizon);
        std::uniform_real_distribution<double> lx(std::log(0.5), std::log(2.0));
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < 20; ++p) {
            const double t = tu(rng);
            const double x = std::exp(lx(rng));
            const auto rep = hamiltonian_argmax_check(pm, t, x, p % pm.regimes(), 10000, seed + p);
            worst = std::max(worst, rep.max_excess);
        }
        out.push_back(bounded("hamiltonian_argmax", std::max(worst, 0.0), kArgmaxSlack));
    }

    {
        const std::size_t i0 = cfg.initial_regime();
        const double x0 = cfg.simulation.x0;
        const auto sim = simulate_wealth(pm, x0, i0, cfg.simulation_options(threads));
        const double v = pm.value(0.0, x0, i0);
        const double z = z_score(sim.objective.mean, v, sim.objective.std_error);
        const std::string detail = "estimate=" + format_csv_number(sim.objective.mean) +
                                   " closed_form=" + format_csv_number(v) +
                                   " rejected=" + std::to_string(sim.rejected_paths);
        if (cfg.zero_uncertain_volatility()) {
            out.push_back(bounded("mc_value_match", z, 3.0, detail));
        } else {
            out.push_back({"mc_value_drift", true, z, std::nullopt, detail + " (exploratory)"});
        }
        out.push_back(bounded("mc_relative_std_error", sim.objective.std_error / std::abs(v), 0.01));
    }

    {
        HybridSDE zero;
        zero.state_dim = 1;
        zero.brownian_dim = 1;
        zero.canonical_dim = 1;
        zero.initial = Eigen::VectorXd::Zero(1);
        zero.drift = [](double, const Eigen::VectorXd&, std::size_t) { return Eigen::VectorXd::Zero(1); };
        zero.brownian_coeff = [](double, const Eigen::VectorXd&, std::size_t) { return Eigen::MatrixXd::Zero(1, 1); };
        zero.canonical_coeff = zero.brownian_coeff;
        SimulationOptions opt = cfg.simulation_options(threads);
        opt.n_paths = std::min<std::size_t>(opt.n_paths, 10000);
        opt.steps = 50;
        opt.seed = check_seed(seed, 1);
        double worst = 0.0;
        const std::pair<double, double> pairs[] = {{1.0, 0.0}, {0.0, 1.0}, {2.0, -3.0}};
        for (const auto& [a, b] : pairs) {
            const auto est = chance_expectation(
                [a = a, b = b](const HybridPathBundle& p) {
                    return a * p.canonical_at(p.steps()) + b * p.brownian_at(p.steps())(0);
                },
                zero, mkt.generator(), cfg.initial_regime(), horizon, opt);
            worst = std::max(worst, z_score(est.mean, 0.0, est.std_error));
        }
        out.push_back(bounded("chance_expectation_null", worst, 3.0));
    }

    {
        const auto rep = variation_table_check(10000, 1000, check_seed(seed, 2));
        out.push_back(bounded("brownian_quadratic_variation",
                              z_score(rep.coarse.brownian_qv.mean, 1.0, rep.coarse.brownian_qv.std_error), 3.0));
        out.push_back(bounded("brownian_cross_variation",
                              z_score(rep.coarse.brownian_cross.mean, 0.0, rep.coarse.brownian_cross.std_error), 3.0));
        const double slope = rep.canonical_qv_slope;
        out.push_back(bounded("canonical_qv_slope", std::abs(slope + 1.0), 0.1,
                              "log-log slope vs steps = " + format_csv_number(slope)));
        out.push_back(bounded("mixed_cross_variation",
                              z_score(rep.coarse.mixed_cross.mean, 0.0, rep.coarse.mixed_cross.std_error), 3.0));
    }

    if (mkt.regimes() >= 2) {
        const auto st = regime_statistics(mkt.generator(), horizon, 100000, check_seed(seed, 3));
        const auto stationary = mkt.generator().stationary_distribution();
        double worst_hold = 0.0, worst_occ = 0.0;
        for (std::size_t i = 0; i < mkt.regimes(); ++i) {
            worst_hold = std::max(worst_hold, z_score(st.holding_mean(i), 1.0 / mkt.exit_rate(i),
                                                      st.holding_std_error(i)));
            worst_occ = std::max(worst_occ, z_score(st.occupation[i].mean,
                                                    stationary(static_cast<Eigen::Index>(i)),
                                                    st.occupation[i].std_error));
        }
        out.push_back(bounded("regime_holding_times", worst_hold, 3.0));
        out.push_back(bounded("regime_occupation", worst_occ, 3.0));
    }
    return out;
}

bool VerifyOutcome::all_pass() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

VerifyOutcome cmd_verify(const ExperimentConfig& cfg, const RunOptions& run) {
    VerifyOutcome outcome;
    outcome.checks = run_verification(cfg, run.threads);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : outcome.checks) {
        nlohmann::ordered_json j;
        j["check"] = c.check;
        j["pass"] = c.pass;
        j["metric"] = c.metric;
        if (c.tolerance) j["tolerance"] = *c.tolerance;
        else j["tolerance"] = nullptr;
        if (!c.detail.empty()) j["detail"] = c.detail;
        arr.push_back(std::move(j));
    }
    outcome.report = output_file(cfg, run, "verify.json");
    write_text(outcome.report, arr.dump(2) + "\n");
    return outcome;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Regime-switching consumption/portfolio solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Experiment config file")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides the config)");
        sub->add_option("--seed", seed, "Simulation seed (overrides the config)");
        sub->add_option("--threads", threads, "Worker threads for Monte Carlo")
            ->check(CLI::PositiveNumber);
    };
    auto* solve = app.add_subcommand("solve", "Solve for A_i(t); writes solution.csv, rho.csv");
    auto* figures = app.add_subcommand("figures", "Consumption ratio and portfolio curves");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo objective under the optimal policy");
    auto* verify = app.add_subcommand("verify", "Run every verification check; writes verify.json");
    for (auto* sub : {solve, figures, simulate, verify}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        for (auto* sub : {solve, figures, simulate, verify}) {
            if (sub->parsed() && sub->count("--seed") > 0) cfg.simulation.seed = seed;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const RunOptions run{out_dir, threads};
    try {
        if (verify->parsed()) {
            const auto outcome = cmd_verify(cfg, run);
            for (const auto& c : outcome.checks) {
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.check << " metric="
                          << format_csv_number(c.metric);
                if (c.tolerance) std::cout << " tolerance=" << format_csv_number(*c.tolerance);
                std::cout << "\n";
            }
            std::cout << "wrote " << outcome.report.string() << "\n";
            if (!outcome.all_pass()) {
                for (const auto& c : outcome.checks) {
                    if (!c.pass) std::cerr << "verification failed: " << c.check << "\n";
                }
                return kExitVerification;
            }
            return kExitOk;
        }
        std::vector<fs::path> files;
        if (solve->parsed()) files = cmd_solve(cfg, run);
        else if (figures->parsed()) files = cmd_figures(cfg, run);
        else if (simulate->parsed()) files = cmd_simulate(cfg, run);
        for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_input_error(e.code()) ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace rsport::cli
