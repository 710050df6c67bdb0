// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "support.hpp"

#include "rsport/cli/commands.hpp"
#include "rsport/cli/config.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace rsport;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = RSPORT_CONFIG_DIR;
constexpr std::uint64_t kSeed = 1;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "MISS ") + what;
    }
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

struct Solved {
    cli::ExperimentConfig cfg;
    PolicyMap pm;
};

Solved solve_config(const std::string& name) {
    auto cfg = cli::load_config(kConfigDir / name);
    auto mkt = cfg.build_market();
    const auto util = cfg.build_utility();
    auto grid = solve_backward(mkt, util, cfg.solver.steps);
    return {cfg, PolicyMap(std::move(mkt), util, std::move(grid))};
}

std::vector<double> interior_times(double horizon, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = horizon * (k + 1.0) / (n + 1.0);
    return t;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = lo * std::pow(hi / lo, k / (n - 1.0));
    return x;
}

std::vector<std::string> last_csv_row(const fs::path& p) {
    std::ifstream in(p);
    std::string line, last;
    while (std::getline(in, line)) {
        if (!line.empty()) last = line;
    }
    std::vector<std::string> cells;
    std::stringstream ss(last);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

Outcome terminal_condition() {
    Outcome o;
    for (const char* name : {"figure1.toml", "figure2.toml"}) {
        const auto s = solve_config(name);
        const auto& g = s.pm.grid();
        bool exact = true;
        for (std::size_t i = 0; i < g.regimes(); ++i) exact = exact && g.value(g.nodes() - 1, i) == 1.0;
        o.require(exact, std::string(name) + " A_i(T) == 1");
        const fs::path dir = fs::temp_directory_path() / "rsport_acceptance" / name;
        cli::cmd_figures(s.cfg, {dir, 1});
        const auto row = last_csv_row(dir / "consumption_ratio.csv");
        double worst = 0.0;
        for (std::size_t c = 1; c < row.size(); ++c) worst = std::max(worst, std::abs(std::stod(row[c]) - 1.0));
        o.require(row.size() == 3 && worst <= 1e-12, std::string(name) + " last ratio row dev " + fmt(worst));
    }
    return o;
}

Outcome figure_shape(const char* name, bool increasing) {
    Outcome o;
    const auto s = solve_config(name);
    const auto& g = s.pm.grid();
    std::size_t monotone_breaks = 0, order_breaks = 0;
    for (std::size_t k = 0; k < g.nodes(); ++k) {
        const double r1 = 1.0 / g.value(k, 0);
        const double r2 = 1.0 / g.value(k, 1);
        if (increasing ? r1 < r2 : r1 > r2) ++order_breaks;
        if (k == 0) continue;
        for (std::size_t i = 0; i < 2; ++i) {
            const double prev = 1.0 / g.value(k - 1, i);
            const double cur = 1.0 / g.value(k, i);
            if (increasing ? cur < prev : cur > prev) ++monotone_breaks;
        }
    }
    o.require(monotone_breaks == 0, std::string(increasing ? "nondecreasing" : "nonincreasing") +
                                        " (breaks " + std::to_string(monotone_breaks) + ")");
    o.require(order_breaks == 0, std::string(increasing ? "regime 1 >= regime 2" : "regime 1 <= regime 2") +
                                     " (breaks " + std::to_string(order_breaks) + ")");
    o.require(true, "c/w(0) = " + fmt(1.0 / g.value(0, 0)) + ", " + fmt(1.0 / g.value(0, 1)));
    return o;
}

Outcome merton_oracle() {
    struct Case {
        double r, alpha, sigma, kappa, beta;
    };
    const Case cases[] = {{0.03, 0.08, 0.20, 3.0, 0.05}, {0.05, 0.15, 0.25, 10.0, 0.07},
                          {0.01, 0.25, 0.60, 0.7, 0.8},  {0.02, 0.10, 0.30, 2.0, 0.10},
                          {0.04, 0.06, 0.15, 0.5, 0.03}};
    auto max_err = [](const Case& c, std::size_t steps, double horizon) {
        const auto grid = solve_backward(test::merton_market(c.r, c.alpha, c.sigma, horizon),
                                         UtilitySpec(c.kappa, c.beta), steps);
        const double rho = test::rho_oracle(c.beta, 0.0, c.kappa, c.r, (c.alpha - c.r) / c.sigma);
        double worst = 0.0;
        for (std::size_t k = 0; k < grid.nodes(); ++k) {
            const double exact = test::merton_a(rho, c.kappa, grid.times()[k], horizon);
            worst = std::max(worst, std::abs(grid.value(k, 0) - exact) / exact);
        }
        return worst;
    };
    Outcome o;
    double worst = 0.0;
    for (const auto& c : cases) worst = std::max(worst, max_err(c, 2000, 1.0));
    o.require(worst <= 1e-8, "max rel err at 2000 steps " + fmt(worst));
    // Orders on a long horizon so the finest grid stays above round-off.
    const Case& c = cases[2];
    const double e[] = {max_err(c, 50, 10.0), max_err(c, 100, 10.0), max_err(c, 200, 10.0), max_err(c, 400, 10.0)};
    for (int k = 1; k < 4; ++k) {
        const double order = std::log2(e[k - 1] / e[k]);
        o.require(std::abs(order - 4.0) <= 0.3, "order " + fmt(order));
    }
    return o;
}

Outcome policy_constants() {
    Outcome o;
    const auto high = solve_config("figure1.toml");
    const auto low = solve_config("figure2.toml");
    auto check = [&](const Solved& s, std::size_t i, double expect, double tol, const std::string& label) {
        const double got = s.pm.optimal_portfolio(i)(0);
        o.require(std::abs(got - expect) <= tol, label + " = " + fmt(got) + " (expected " + fmt(expect) + ")");
    };
    check(high, 0, 0.16, 1e-12, "kappa=10 regime 1");
    check(high, 1, 0.0667, 5e-4, "kappa=10 regime 2");
    check(low, 0, 0.5714, 5e-4, "kappa=0.7 regime 1");
    check(low, 1, 0.9524, 5e-4, "kappa=0.7 regime 2");
    return o;
}

Outcome hjb_residual_criterion() {
    Outcome o;
    for (const char* name : {"figure1.toml", "figure2.toml"}) {
        const auto s = solve_config(name);
        const auto rep = hjb_residual(s.pm, interior_times(s.pm.horizon(), 50), log_grid(0.1, 10.0, 20));
        o.require(rep.max_rel_residual <= 1e-5, std::string(name) + " rel " + fmt(rep.max_rel_residual));
    }
    return o;
}

Outcome argmax_criterion() {
    Outcome o;
    for (const char* name : {"figure1.toml", "figure2.toml"}) {
        const auto s = solve_config(name);
        auto rng = stream_engine(kSeed, 0xac);
        std::uniform_real_distribution<double> tu(0.05, 0.95);
        std::uniform_real_distribution<double> lx(std::log(0.5), std::log(2.0));
        double worst = -INFINITY;
        for (std::size_t p = 0; p < 20; ++p) {
            const double t = tu(rng) * s.pm.horizon();
            const double x = std::exp(lx(rng));
            const auto rep = hamiltonian_argmax_check(s.pm, t, x, p % s.pm.regimes(), 10000, kSeed + p);
            worst = std::max(worst, rep.max_excess);
        }
        o.require(worst <= 1e-9, std::string(name) + " max excess " + fmt(worst));
    }
    return o;
}

Outcome monte_carlo_criterion() {
    Outcome o;
    for (const char* name : {"figure1.toml", "figure2.toml"}) {
        const auto s = solve_config(name);
        const auto opt = s.cfg.simulation_options(1);
        const std::size_t i0 = s.cfg.initial_regime();
        const double x0 = s.cfg.simulation.x0;
        const auto sim = simulate_wealth(s.pm, x0, i0, opt);
        const double v = s.pm.value(0.0, x0, i0);
        const double z = test::z_of(sim.objective.mean, v, sim.objective.std_error);
        const double rel = sim.objective.std_error / std::abs(v);
        o.require(opt.n_paths == 100000 && opt.steps == 1000, std::string(name) + " sizes 1e5 x 1000");
        o.require(z <= 3.0, std::string(name) + " z " + fmt(z));
        o.require(rel <= 0.01, std::string(name) + " rel se " + fmt(rel));
    }
    return o;
}

Outcome chance_null_criterion() {
    Outcome o;
    HybridSDE zero;
    zero.initial = Eigen::VectorXd::Zero(1);
    zero.drift = [](double, const Eigen::VectorXd&, std::size_t) { return Eigen::VectorXd::Zero(1); };
    zero.brownian_coeff = [](double, const Eigen::VectorXd&, std::size_t) { return Eigen::MatrixXd::Zero(1, 1); };
    zero.canonical_coeff = zero.brownian_coeff;
    SimulationOptions opt;
    opt.n_paths = 10000;
    opt.steps = 50;
    opt.seed = kSeed;
    const auto gen = test::two_regime_market().generator();
    for (const auto& [a, b] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{2.0, -3.0}}) {
        const auto est = chance_expectation(
            [a = a, b = b](const HybridPathBundle& p) {
                return a * p.canonical_at(p.steps()) + b * p.brownian_at(p.steps())(0);
            },
            zero, gen, 0, 1.0, opt);
        const double z = test::z_of(est.mean, 0.0, est.std_error);
        o.require(z <= 3.0, "(" + fmt(a) + "," + fmt(b) + ") z " + fmt(z));
    }
    return o;
}

Outcome multiplication_table_criterion() {
    Outcome o;
    const auto rep = variation_table_check(10000, 1000, kSeed);
    const double zq = test::z_of(rep.coarse.brownian_qv.mean, 1.0, rep.coarse.brownian_qv.std_error);
    const double zc = test::z_of(rep.coarse.mixed_cross.mean, 0.0, rep.coarse.mixed_cross.std_error);
    o.require(zq <= 3.0, "QV z " + fmt(zq));
    o.require(std::abs(rep.canonical_qv_slope + 1.0) <= 0.1, "canonical QV slope " + fmt(rep.canonical_qv_slope));
    o.require(zc <= 3.0, "dB dC z " + fmt(zc));
    return o;
}

Outcome ctmc_criterion() {
    Outcome o;
    const auto gen = test::two_regime_market().generator();
    const auto st = regime_statistics(gen, 1.0, 100000, kSeed);
    for (std::size_t i = 0; i < 2; ++i) {
        const double z = test::z_of(st.holding_mean(i), 1.0 / gen.exit_rate(i), st.holding_std_error(i));
        o.require(z <= 3.0, "holding " + std::to_string(i + 1) + " z " + fmt(z));
    }
    const double z = test::z_of(st.occupation[0].mean, 2.5 / 3.7, st.occupation[0].std_error);
    o.require(z <= 3.0, "occupation z " + fmt(z));
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "terminal condition", 1.0, terminal_condition},
        {2, "high risk aversion curves", 1.0, [] { return figure_shape("figure1.toml", true); }},
        {3, "high risk tolerance curves", 1.0, [] { return figure_shape("figure2.toml", false); }},
        {4, "single-regime analytic oracle", 0.0, merton_oracle},
        {5, "policy constants", 0.0, policy_constants},
        {6, "HJB residual", 5.0, hjb_residual_criterion},
        {7, "Hamiltonian argmax", 30.0, argmax_criterion},
        {8, "Monte Carlo value match", 300.0, monte_carlo_criterion},
        {9, "chance-expectation null", 0.0, chance_null_criterion},
        {10, "multiplication table", 60.0, multiplication_table_criterion},
        {11, "CTMC statistics", 0.0, ctmc_criterion},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_s > 0.0) o.require(secs < c.limit_s, "runtime " + fmt(secs) + " s < " + fmt(c.limit_s) + " s");
        std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d of %zu criteria failed\n", failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
