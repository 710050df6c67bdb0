#include "rsport/cli/config.hpp"

#include "rsport/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace rsport::cli {

namespace {

class Reader {
public:
    explicit Reader(const TomlDocument& doc) : doc_(doc) {}

    [[noreturn]] void fail(std::size_t line, const std::string& field, const std::string& what) const {
        throw ConfigError(doc_.source, line, field, what);
    }

    std::size_t table_line(const std::string& table) const {
        const auto it = doc_.table_lines.find(table);
        return it == doc_.table_lines.end() ? 0 : it->second;
    }

    const std::map<std::string, TomlValue>& table(const std::string& name, bool required) const {
        static const std::map<std::string, TomlValue> empty;
        const auto it = doc_.tables.find(name);
        if (it == doc_.tables.end()) {
            if (required) fail(0, name, "missing table [" + name + "]");
            return empty;
        }
        return it->second;
    }

    const TomlValue* find(const std::string& tbl, const std::string& key, bool required) const {
        const auto& t = table(tbl, required);
        const auto it = t.find(key);
        if (it == t.end()) {
            if (required) fail(table_line(tbl), dotted(tbl, key), "missing required key");
            return nullptr;
        }
        return &it->second;
    }

    static std::string dotted(const std::string& tbl, const std::string& key) {
        return tbl.empty() ? key : tbl + "." + key;
    }

    double number(const std::string& tbl, const std::string& key, bool required,
                  double fallback) const {
        const TomlValue* v = find(tbl, key, required);
        if (!v) return fallback;
        if (!v->is_number()) fail(v->line, dotted(tbl, key), "expected a number");
        const double x = std::get<double>(v->data);
        if (!std::isfinite(x)) fail(v->line, dotted(tbl, key), "value must be finite");
        return x;
    }

    std::uint64_t integer(const std::string& tbl, const std::string& key, bool required,
                          std::uint64_t fallback, std::uint64_t min_value) const {
        const TomlValue* v = find(tbl, key, required);
        if (!v) return fallback;
        if (!v->is_number() || !v->integral) {
            fail(v->line, dotted(tbl, key), "expected an integer");
        }
        std::uint64_t x = 0;
        const auto* first = v->raw.data();
        const auto* last = v->raw.data() + v->raw.size();
        const auto [ptr, ec] = std::from_chars(first, last, x);
        if (ec != std::errc() || ptr != last || x < min_value) {
            fail(v->line, dotted(tbl, key),
                 "value must be an integer >= " + std::to_string(min_value));
        }
        return x;
    }

    std::string string(const std::string& tbl, const std::string& key, bool required,
                       std::string fallback) const {
        const TomlValue* v = find(tbl, key, required);
        if (!v) return fallback;
        if (!v->is_string()) fail(v->line, dotted(tbl, key), "expected a string");
        return std::get<std::string>(v->data);
    }

    // A number is accepted as a 1-vector.
    Eigen::VectorXd vector(const std::string& tbl, const std::string& key, std::size_t size) const {
        const TomlValue* v = find(tbl, key, true);
        const std::string field = dotted(tbl, key);
        if (v->is_number()) {
            if (size != 1) fail(v->line, field, "expected an array of " + std::to_string(size));
            return Eigen::VectorXd::Constant(1, finite(*v, field));
        }
        if (!v->is_array()) fail(v->line, field, "expected an array");
        const auto& arr = std::get<TomlValue::Array>(v->data);
        if (arr.size() != size) {
            fail(v->line, field, "expected " + std::to_string(size) + " entries, got " +
                                     std::to_string(arr.size()));
        }
        Eigen::VectorXd out(static_cast<Eigen::Index>(size));
        for (std::size_t k = 0; k < size; ++k) out(static_cast<Eigen::Index>(k)) = finite(arr[k], field);
        return out;
    }

    // A number is accepted as a 1×1 matrix.
    Eigen::MatrixXd matrix(const std::string& tbl, const std::string& key, std::size_t rows,
                           std::size_t cols) const {
        const TomlValue* v = find(tbl, key, true);
        const std::string field = dotted(tbl, key);
        if (v->is_number()) {
            if (rows != 1 || cols != 1) fail(v->line, field, "expected a nested array");
            return Eigen::MatrixXd::Constant(1, 1, finite(*v, field));
        }
        if (!v->is_array()) fail(v->line, field, "expected a nested array");
        const auto& outer = std::get<TomlValue::Array>(v->data);
        if (outer.size() != rows) {
            fail(v->line, field, "expected " + std::to_string(rows) + " rows, got " +
                                     std::to_string(outer.size()));
        }
        Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows; ++r) {
            if (!outer[r].is_array()) fail(outer[r].line, field, "row " + std::to_string(r + 1) + " is not an array");
            const auto& row = std::get<TomlValue::Array>(outer[r].data);
            if (row.size() != cols) {
                fail(outer[r].line, field, "row " + std::to_string(r + 1) + " has " +
                                               std::to_string(row.size()) + " entries, expected " +
                                               std::to_string(cols));
            }
            for (std::size_t c = 0; c < cols; ++c) {
                out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = finite(row[c], field);
            }
        }
        return out;
    }

    std::size_t line_of(const std::string& tbl, const std::string& key) const {
        const TomlValue* v = find(tbl, key, false);
        return v ? v->line : table_line(tbl);
    }

    void reject_unknown(const std::string& tbl, const std::set<std::string>& allowed) const {
        for (const auto& [key, value] : table(tbl, false)) {
            if (!allowed.contains(key)) fail(value.line, dotted(tbl, key), "unknown key");
        }
    }

    const TomlDocument& doc() const { return doc_; }

private:
    double finite(const TomlValue& v, const std::string& field) const {
        if (!v.is_number()) fail(v.line, field, "expected a number");
        const double x = std::get<double>(v.data);
        if (!std::isfinite(x)) fail(v.line, field, "value must be finite");
        return x;
    }

    const TomlDocument& doc_;
};

std::string regime_table(std::size_t i) { return "market.regime." + std::to_string(i + 1); }

}  // namespace

RegimeMarket ExperimentConfig::build_market() const {
    return RegimeMarket(Generator::validate(market.generator), market.coefficients, market.horizon);
}

UtilitySpec ExperimentConfig::build_utility() const { return UtilitySpec(utility.kappa, utility.beta); }

SimulationOptions ExperimentConfig::simulation_options(std::size_t threads) const {
    SimulationOptions o;
    o.n_paths = simulation.n_paths;
    o.steps = simulation.steps;
    o.alpha_nodes = simulation.alpha_nodes;
    o.seed = simulation.seed;
    o.threads = threads;
    return o;
}

bool ExperimentConfig::zero_uncertain_volatility() const {
    for (const auto& c : market.coefficients) {
        if (!c.uncertain_vol.isZero(0.0)) return false;
    }
    return true;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
    };
    if (a.name != b.name || a.market.regimes != b.market.regimes ||
        a.market.assets != b.market.assets || a.market.canonical_dims != b.market.canonical_dims ||
        a.market.horizon != b.market.horizon || !same(a.market.generator, b.market.generator) ||
        a.market.coefficients.size() != b.market.coefficients.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.market.coefficients.size(); ++i) {
        const auto& x = a.market.coefficients[i];
        const auto& y = b.market.coefficients[i];
        if (x.rate != y.rate || !same(x.expected_return, y.expected_return) ||
            !same(x.volatility, y.volatility) || !same(x.uncertain_vol, y.uncertain_vol)) {
            return false;
        }
    }
    return a.utility.kappa == b.utility.kappa && a.utility.beta == b.utility.beta &&
           a.solver.steps == b.solver.steps && a.simulation.n_paths == b.simulation.n_paths &&
           a.simulation.steps == b.simulation.steps &&
           a.simulation.alpha_nodes == b.simulation.alpha_nodes &&
           a.simulation.seed == b.simulation.seed && a.simulation.x0 == b.simulation.x0 &&
           a.simulation.i0 == b.simulation.i0 && a.output.directory == b.output.directory &&
           a.output.prefix == b.output.prefix;
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
    const TomlDocument doc = parse_toml(text, source);
    const Reader rd(doc);
    ExperimentConfig cfg;

    std::set<std::string> known_tables{"", "market", "utility", "solver", "simulation", "output"};

    rd.reject_unknown("", {"name"});
    cfg.name = rd.string("", "name", false, "");

    // market
    rd.reject_unknown("market", {"regimes", "assets", "canonical_dims", "horizon", "generator"});
    auto& mk = cfg.market;
    mk.regimes = rd.integer("market", "regimes", true, 1, 1);
    mk.assets = rd.integer("market", "assets", false, 1, 1);
    mk.canonical_dims = rd.integer("market", "canonical_dims", false, 1, 1);
    mk.horizon = rd.number("market", "horizon", true, 1.0);
    if (!(mk.horizon > 0.0)) rd.fail(rd.line_of("market", "horizon"), "market.horizon", "must be positive");
    mk.generator = rd.matrix("market", "generator", mk.regimes, mk.regimes);
    try {
        (void)Generator::validate(mk.generator);
    } catch (const Error& e) {
        rd.fail(rd.line_of("market", "generator"), "market.generator", e.what());
    }

    const Generator single = Generator::validate(Eigen::MatrixXd::Zero(1, 1));
    for (std::size_t i = 0; i < mk.regimes; ++i) {
        const std::string tbl = regime_table(i);
        known_tables.insert(tbl);
        if (!doc.has_table(tbl)) rd.fail(0, tbl, "missing table [" + tbl + "]");
        rd.reject_unknown(tbl, {"rate", "expected_return", "volatility", "uncertain_vol"});
        RegimeCoefficients c;
        c.rate = rd.number(tbl, "rate", true, 0.0);
        c.expected_return = rd.vector(tbl, "expected_return", mk.assets);
        c.volatility = rd.matrix(tbl, "volatility", mk.assets, mk.assets);
        if (doc.tables.at(tbl).contains("uncertain_vol")) {
            c.uncertain_vol = rd.matrix(tbl, "uncertain_vol", mk.assets, mk.canonical_dims);
        } else {
            c.uncertain_vol = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mk.assets),
                                                    static_cast<Eigen::Index>(mk.canonical_dims));
        }
        try {
            (void)market_price_of_risk(RegimeMarket(single, {c}, mk.horizon));
        } catch (const Error& e) {
            rd.fail(rd.line_of(tbl, "volatility"), tbl + ".volatility", e.what());
        }
        mk.coefficients.push_back(std::move(c));
    }

    // utility
    rd.reject_unknown("utility", {"kappa", "beta"});
    cfg.utility.kappa = rd.number("utility", "kappa", true, 2.0);
    cfg.utility.beta = rd.number("utility", "beta", true, 0.0);
    try {
        (void)cfg.build_utility();
    } catch (const Error& e) {
        rd.fail(rd.line_of("utility", "kappa"), "utility", e.what());
    }

    // solver
    rd.reject_unknown("solver", {"steps"});
    cfg.solver.steps = rd.integer("solver", "steps", false, kDefaultSolverSteps, 10);

    // simulation
    rd.reject_unknown("simulation", {"n_paths", "steps", "alpha_nodes", "seed", "x0", "i0"});
    auto& sim = cfg.simulation;
    sim.n_paths = rd.integer("simulation", "n_paths", false, sim.n_paths, 1);
    sim.steps = rd.integer("simulation", "steps", false, sim.steps, 1);
    sim.alpha_nodes = rd.integer("simulation", "alpha_nodes", false, sim.alpha_nodes, 3);
    sim.seed = rd.integer("simulation", "seed", false, sim.seed, 0);
    sim.x0 = rd.number("simulation", "x0", false, sim.x0);
    if (!(sim.x0 > 0.0)) rd.fail(rd.line_of("simulation", "x0"), "simulation.x0", "must be positive");
    sim.i0 = rd.integer("simulation", "i0", false, sim.i0, 1);
    if (sim.i0 > mk.regimes) {
        rd.fail(rd.line_of("simulation", "i0"), "simulation.i0", "exceeds the number of regimes");
    }

    // output
    rd.reject_unknown("output", {"directory", "prefix"});
    cfg.output.directory = rd.string("output", "directory", false, cfg.output.directory);
    cfg.output.prefix = rd.string("output", "prefix", false, "");

    for (const auto& [name, entries] : doc.tables) {
        if (!known_tables.contains(name)) rd.fail(rd.table_line(name), name, "unknown table");
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), 0, "", "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

namespace {

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    // Keep non-integral markers so integers and reals stay distinguishable.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        if (c == '\t') {
            out += "\\t";
            continue;
        }
        out.push_back(c);
    }
    return out + "\"";
}

std::string vec(const Eigen::VectorXd& v) {
    std::string out = "[";
    for (Eigen::Index k = 0; k < v.size(); ++k) out += (k ? ", " : "") + num(v(k));
    return out + "]";
}

std::string mat(const Eigen::MatrixXd& m) {
    std::string out = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out += r ? ", [" : "[";
        for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? ", " : "") + num(m(r, c));
        out += "]";
    }
    return out + "]";
}

}  // namespace

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    if (!cfg.name.empty()) os << "name = " << quoted(cfg.name) << "\n\n";
    const auto& mk = cfg.market;
    os << "[market]\n"
       << "regimes = " << mk.regimes << "\n"
       << "assets = " << mk.assets << "\n"
       << "canonical_dims = " << mk.canonical_dims << "\n"
       << "horizon = " << num(mk.horizon) << "\n"
       << "generator = " << mat(mk.generator) << "\n";
    for (std::size_t i = 0; i < mk.coefficients.size(); ++i) {
        const auto& c = mk.coefficients[i];
        os << "\n[" << regime_table(i) << "]\n"
           << "rate = " << num(c.rate) << "\n"
           << "expected_return = " << vec(c.expected_return) << "\n"
           << "volatility = " << mat(c.volatility) << "\n"
           << "uncertain_vol = " << mat(c.uncertain_vol) << "\n";
    }
    os << "\n[utility]\n"
       << "kappa = " << num(cfg.utility.kappa) << "\n"
       << "beta = " << num(cfg.utility.beta) << "\n";
    os << "\n[solver]\nsteps = " << cfg.solver.steps << "\n";
    const auto& sim = cfg.simulation;
    os << "\n[simulation]\n"
       << "n_paths = " << sim.n_paths << "\n"
       << "steps = " << sim.steps << "\n"
       << "alpha_nodes = " << sim.alpha_nodes << "\n"
       << "seed = " << sim.seed << "\n"
       << "x0 = " << num(sim.x0) << "\n"
       << "i0 = " << sim.i0 << "\n";
    os << "\n[output]\n"
       << "directory = " << quoted(cfg.output.directory) << "\n"
       << "prefix = " << quoted(cfg.output.prefix) << "\n";
    return os.str();
}

}  // namespace rsport::cli
