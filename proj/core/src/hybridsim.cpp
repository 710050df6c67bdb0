#include "rsport/hybridsim.hpp"

#include "rsport/error.hpp"
#include "rsport/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace rsport {

// ---------------------------------------------------------------------------
// Regime chain

std::size_t RegimePath::state_at(double t) const {
    const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin())];
}

RegimePath sample_regime_path(const Generator& gen, std::size_t i0, double horizon,
                              std::mt19937_64& rng) {
    if (i0 >= gen.regimes()) {
        throw Error(ErrorCode::OutOfRange, "initial regime " + std::to_string(i0));
    }
    RegimePath path;
    path.horizon = horizon;
    path.states.push_back(i0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t state = i0;
    double t = 0.0;
    for (;;) {
        const double lambda = gen.exit_rate(state);
        if (!(lambda > 0.0)) break;
        t += std::exponential_distribution<double>(lambda)(rng);
        if (t >= horizon) break;
        // Destination j ≠ state with probability q_ij / λ_i.
        const double u = unit(rng) * lambda;
        double acc = 0.0;
        std::size_t next = state;
        for (std::size_t j = 0; j < gen.regimes(); ++j) {
            if (j == state) continue;
            const double q = gen.rate(state, j);
            if (q <= 0.0) continue;
            next = j;
            acc += q;
            if (u < acc) break;
        }
        path.jump_times.push_back(t);
        path.states.push_back(next);
        state = next;
    }
    return path;
}

RegimePath sample_regime_path(const Generator& gen, std::size_t i0, double horizon,
                              std::uint64_t seed) {
    auto rng = stream_engine(seed, 0);
    return sample_regime_path(gen, i0, horizon, rng);
}

// ---------------------------------------------------------------------------
// Canonical process

double canonical_slope(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::DegenerateQuantile, "quantile level must lie in (0, 1)");
    }
    return kCanonicalScale * std::log(alpha / (1.0 - alpha));
}

std::vector<double> canonical_alpha_path(double alpha, const UniformGrid& grid) {
    const double slope = canonical_slope(alpha);
    std::vector<double> path(grid.steps + 1);
    for (std::size_t k = 0; k <= grid.steps; ++k) path[k] = slope * grid.time(k);
    return path;
}

QuantileRule gauss_legendre_quantiles(std::size_t nodes) {
    if (nodes == 0) {
        throw Error(ErrorCode::InvalidArgument, "quantile rule needs at least one node");
    }
    const std::size_t n = nodes;
    const std::size_t half = n / 2;
    // Positive roots u of P_n on (-1, 1) and their weights, via Newton from the
    // Chebyshev-like initial guess.
    std::vector<double> roots(half), weights(half);
    for (std::size_t k = 0; k < half; ++k) {
        double u = std::cos(std::numbers::pi * (static_cast<double>(k) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = u;
            for (std::size_t j = 2; j <= n; ++j) {
                const double jd = static_cast<double>(j);
                const double p2 = ((2.0 * jd - 1.0) * u * p1 - (jd - 1.0) * p0) / jd;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (u * p1 - p0) / (u * u - 1.0);
            const double du = p1 / dp;
            u -= du;
            if (std::abs(du) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = u;
        for (std::size_t j = 2; j <= n; ++j) {
            const double jd = static_cast<double>(j);
            const double p2 = ((2.0 * jd - 1.0) * u * p1 - (jd - 1.0) * p0) / jd;
            p0 = p1;
            p1 = p2;
        }
        dp = static_cast<double>(n) * (u * p1 - p0) / (u * u - 1.0);
        roots[k] = u;
        weights[k] = 2.0 / ((1.0 - u * u) * dp * dp);
    }

    QuantileRule rule;
    auto push = [&](double u, double w, double slope) {
        rule.alpha.push_back(0.5 * (1.0 + u));
        rule.weight.push_back(0.5 * w);
        rule.slope.push_back(slope);
    };
    // Ascending in α: negative roots first, then the centre node, then positive.
    for (std::size_t k = 0; k < half; ++k) {
        const double u = roots[k];
        push(-u, weights[k], -kCanonicalScale * (std::log1p(u) - std::log1p(-u)));
    }
    if (n % 2 == 1) {
        double w = 2.0;
        for (double v : weights) w -= 2.0 * v;
        push(0.0, w, 0.0);
    }
    for (std::size_t k = half; k-- > 0;) {
        const double u = roots[k];
        push(u, weights[k], kCanonicalScale * (std::log1p(u) - std::log1p(-u)));
    }
    rule.mirror.resize(n);
    for (std::size_t k = 0; k < n; ++k) rule.mirror[k] = n - 1 - k;
    return rule;
}

// ---------------------------------------------------------------------------
// Draws and paths

Eigen::VectorXd RandomDraw::step_increment(std::size_t k) const {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(seg_brownian.cols());
    for (std::size_t s = step_begin[k]; s < step_begin[k + 1]; ++s) {
        sum += seg_brownian.row(static_cast<Eigen::Index>(s)).transpose();
    }
    return sum;
}

namespace {

// Fills the segment layout of `draw` from its regime path and grid.
void build_segments(RandomDraw& draw) {
    const auto& grid = draw.grid;
    const auto& jumps = draw.regimes.jump_times;
    draw.seg_start.clear();
    draw.seg_length.clear();
    draw.seg_regime.clear();
    draw.step_begin.assign(grid.steps + 1, 0);
    std::size_t next_jump = 0;
    std::size_t state_index = 0;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        draw.step_begin[k] = draw.seg_start.size();
        const double t0 = grid.time(k);
        const double t1 = grid.time(k + 1);
        double a = t0;
        while (next_jump < jumps.size() && jumps[next_jump] < t1) {
            const double tau = jumps[next_jump];
            if (tau > a) {
                draw.seg_start.push_back(a);
                draw.seg_length.push_back(tau - a);
                draw.seg_regime.push_back(draw.regimes.states[state_index]);
                a = tau;
            }
            ++state_index;
            ++next_jump;
        }
        draw.seg_start.push_back(a);
        draw.seg_length.push_back(t1 - a);
        draw.seg_regime.push_back(draw.regimes.states[state_index]);
    }
    draw.step_begin[grid.steps] = draw.seg_start.size();
}

}  // namespace

RandomDraw sample_random_draw(const Generator& gen, std::size_t i0, const UniformGrid& grid,
                              std::size_t brownian_dim, std::mt19937_64& rng) {
    RandomDraw draw;
    draw.grid = grid;
    draw.regimes = sample_regime_path(gen, i0, grid.horizon, rng);
    build_segments(draw);
    std::normal_distribution<double> normal;
    const auto segs = static_cast<Eigen::Index>(draw.segments());
    draw.seg_brownian.resize(segs, static_cast<Eigen::Index>(brownian_dim));
    for (Eigen::Index s = 0; s < segs; ++s) {
        const double sd = std::sqrt(draw.seg_length[static_cast<std::size_t>(s)]);
        for (Eigen::Index d = 0; d < draw.seg_brownian.cols(); ++d) {
            draw.seg_brownian(s, d) = sd * normal(rng);
        }
    }
    return draw;
}

Eigen::VectorXd HybridPathBundle::brownian_at(std::size_t k) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(brownian.cols());
    for (std::size_t s = 0; s < k; ++s) b += brownian.row(static_cast<Eigen::Index>(s)).transpose();
    return b;
}

Eigen::VectorXd euler_step(const HybridSDE& sde, const RandomDraw& draw, double alpha_slope,
                           const Eigen::VectorXd& state, std::size_t k) {
    Eigen::VectorXd x = state;
    const Eigen::VectorXd dc_unit = Eigen::VectorXd::Constant(
        static_cast<Eigen::Index>(sde.canonical_dim), alpha_slope);
    for (std::size_t s = draw.step_begin[k]; s < draw.step_begin[k + 1]; ++s) {
        const double t = draw.seg_start[s];
        const double dt = draw.seg_length[s];
        const std::size_t i = draw.seg_regime[s];
        const Eigen::VectorXd db = draw.seg_brownian.row(static_cast<Eigen::Index>(s)).transpose();
        const Eigen::VectorXd f = sde.drift(t, x, i);
        const Eigen::MatrixXd g = sde.brownian_coeff(t, x, i);
        const Eigen::MatrixXd h = sde.canonical_coeff(t, x, i);
        if (!f.allFinite() || !g.allFinite() || !h.allFinite()) {
            throw Error(ErrorCode::NonFiniteState,
                        "non-finite coefficient at t = " + std::to_string(t));
        }
        x += f * dt + g * db + h * (dc_unit * dt);
        if (!x.allFinite()) {
            throw Error(ErrorCode::NonFiniteState, "non-finite state at t = " + std::to_string(t));
        }
    }
    return x;
}

HybridPathBundle simulate_path(const HybridSDE& sde, const RandomDraw& draw, double alpha) {
    return simulate_path(sde, draw, alpha, canonical_slope(alpha));
}

HybridPathBundle simulate_path(const HybridSDE& sde, const RandomDraw& draw, double alpha,
                               double slope) {
    HybridPathBundle bundle;
    const auto& grid = draw.grid;
    bundle.alpha = alpha;
    bundle.canonical_slope = slope;
    bundle.times.resize(grid.steps + 1);
    bundle.regimes.resize(grid.steps + 1);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
        bundle.times[k] = grid.time(k);
        bundle.regimes[k] = draw.regimes.state_at(bundle.times[k]);
    }
    bundle.brownian.resize(static_cast<Eigen::Index>(grid.steps), draw.seg_brownian.cols());
    for (std::size_t k = 0; k < grid.steps; ++k) {
        bundle.brownian.row(static_cast<Eigen::Index>(k)) = draw.step_increment(k).transpose();
    }
    bundle.state.resize(static_cast<Eigen::Index>(grid.steps + 1),
                        static_cast<Eigen::Index>(sde.state_dim));
    Eigen::VectorXd x = sde.initial;
    bundle.state.row(0) = x.transpose();
    for (std::size_t k = 0; k < grid.steps; ++k) {
        x = euler_step(sde, draw, bundle.canonical_slope, x, k);
        bundle.state.row(static_cast<Eigen::Index>(k + 1)) = x.transpose();
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// Estimation

namespace {

// Runs `per_path(index)` for every path, splitting contiguous index ranges
// over worker threads. Results are stored by index so the reduction order
// never depends on the thread count.
template <typename Fn>
std::vector<double> run_paths(std::size_t n_paths, std::size_t threads, Fn per_path) {
    std::vector<double> out(n_paths);
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n_paths, 1));
    if (threads == 1) {
        for (std::size_t p = 0; p < n_paths; ++p) out[p] = per_path(p);
        return out;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n_paths + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t lo = w * chunk;
                const std::size_t hi = std::min(n_paths, lo + chunk);
                for (std::size_t p = lo; p < hi; ++p) out[p] = per_path(p);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

// Mean and standard error of the finite entries; NaN marks a rejected path.
ChanceEstimate summarize(const std::vector<double>& samples, std::size_t alpha_nodes) {
    ChanceEstimate est;
    est.n_alpha_nodes = alpha_nodes;
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : samples) {
        if (std::isnan(v)) continue;
        sum += v;
        ++n;
    }
    est.n_random_paths = n;
    if (n == 0) return est;
    est.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) {
        if (std::isnan(v)) continue;
        ss += (v - est.mean) * (v - est.mean);
    }
    est.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return est;
}

// Σ_k w_k F_k summed over mirrored pairs.
template <typename Eval>
double integrate_quantiles(const QuantileRule& rule, Eval eval) {
    const std::size_t n = rule.alpha.size();
    double total = 0.0;
    for (std::size_t k = 0; k < n / 2; ++k) {
        const std::size_t m = rule.mirror[k];
        total += rule.weight[k] * (eval(k) + eval(m));
    }
    if (n % 2 == 1) total += rule.weight[n / 2] * eval(n / 2);
    return total;
}

}  // namespace

ChanceEstimate chance_expectation(const PathFunctional& functional, const HybridSDE& sde,
                                  const Generator& gen, std::size_t i0, double horizon,
                                  const SimulationOptions& options) {
    if (options.alpha_nodes < 3) {
        throw Error(ErrorCode::InvalidArgument, "chance expectation needs at least 3 alpha nodes");
    }
    if (options.n_paths < 1 || options.steps < 1) {
        throw Error(ErrorCode::InvalidArgument, "need at least one path and one step");
    }
    const QuantileRule rule = gauss_legendre_quantiles(options.alpha_nodes);
    const UniformGrid grid{horizon, options.steps};
    const auto samples = run_paths(options.n_paths, options.threads, [&](std::size_t p) {
        auto rng = stream_engine(options.seed, p);
        const RandomDraw draw = sample_random_draw(gen, i0, grid, sde.brownian_dim, rng);
        return integrate_quantiles(rule, [&](std::size_t k) {
            return functional(simulate_path(sde, draw, rule.alpha[k], rule.slope[k]));
        });
    });
    return summarize(samples, options.alpha_nodes);
}

WealthSimulation simulate_wealth(const PolicyMap& pm, double x0, std::size_t i0,
                                 const SimulationOptions& options) {
    if (!(x0 > 0.0)) {
        throw Error(ErrorCode::NonPositiveWealth, "initial wealth must be positive");
    }
    if (i0 >= pm.regimes()) {
        throw Error(ErrorCode::OutOfRange, "initial regime " + std::to_string(i0));
    }
    if (options.n_paths < 1 || options.steps < 1 || options.alpha_nodes < 1) {
        throw Error(ErrorCode::InvalidArgument, "need at least one path, step and alpha node");
    }
    const auto& mkt = pm.market();
    const std::size_t s_count = pm.regimes();
    const double kappa = pm.utility().risk_aversion();
    const double beta = pm.utility().discount_rate();
    const double horizon = pm.horizon();
    const UniformGrid grid{horizon, options.steps};
    const std::size_t m = mkt.assets();

    // Per-regime closed-loop coefficients (wealth-proportional):
    // drift r + π̂ᵀσθ, Brownian exposure σᵀπ̂, canonical exposure Σ_d (ηᵀπ̂)_d.
    std::vector<double> drift(s_count), canon(s_count);
    std::vector<Eigen::VectorXd> expo(s_count);
    bool uncertain = false;
    for (std::size_t i = 0; i < s_count; ++i) {
        const auto& c = mkt.regime(i);
        const auto& pi = pm.optimal_portfolio(i);
        drift[i] = c.rate + pi.dot(c.volatility * pm.theta()[i]);
        expo[i] = c.volatility.transpose() * pi;
        canon[i] = (c.uncertain_vol.transpose() * pi).sum();
        if (canon[i] != 0.0) uncertain = true;
    }
    // A_i and e^{-βt} at the grid nodes.
    Eigen::MatrixXd a_nodes(static_cast<Eigen::Index>(grid.steps + 1),
                            static_cast<Eigen::Index>(s_count));
    std::vector<double> discount(grid.steps + 1);
    for (std::size_t k = 0; k <= grid.steps; ++k) {
        const double t = grid.time(k);
        discount[k] = std::exp(-beta * t);
        for (std::size_t i = 0; i < s_count; ++i) {
            a_nodes(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) =
                pm.coefficient(t, i);
        }
    }
    const double terminal_discount = std::exp(-beta * horizon);
    auto utility = [kappa](double z) { return std::pow(z, 1.0 - kappa) / (1.0 - kappa); };

    const QuantileRule rule = gauss_legendre_quantiles(options.alpha_nodes);

    const auto samples = run_paths(options.n_paths, options.threads, [&](std::size_t p) {
        auto rng = stream_engine(options.seed, p);
        const RandomDraw draw = sample_random_draw(mkt.generator(), i0, grid, m, rng);

        // Objective along one α-path; NaN when wealth leaves (0, ∞).
        auto objective = [&](double slope) {
            double w = x0;
            double integral = 0.0;
            for (std::size_t k = 0; k < grid.steps; ++k) {
                const auto kb = draw.step_begin[k];
                const auto ke = draw.step_begin[k + 1];
                for (std::size_t s = kb; s < ke; ++s) {
                    const std::size_t i = draw.seg_regime[s];
                    const double t0 = draw.seg_start[s];
                    const double dt = draw.seg_length[s];
                    const double t1 = (s + 1 == ke) ? grid.time(k + 1) : t0 + dt;
                    const double a0 = (s == kb) ? a_nodes(static_cast<Eigen::Index>(k),
                                                          static_cast<Eigen::Index>(i))
                                                : pm.coefficient(t0, i);
                    const double a1 = (s + 1 == ke) ? a_nodes(static_cast<Eigen::Index>(k + 1),
                                                              static_cast<Eigen::Index>(i))
                                                    : pm.coefficient(t1, i);
                    const double d0 = (s == kb) ? discount[k] : std::exp(-beta * t0);
                    const double d1 = (s + 1 == ke) ? discount[k + 1] : std::exp(-beta * t1);
                    double noise = 0.0;
                    for (std::size_t d = 0; d < m; ++d) {
                        noise += expo[i](static_cast<Eigen::Index>(d)) *
                                 draw.seg_brownian(static_cast<Eigen::Index>(s),
                                                   static_cast<Eigen::Index>(d));
                    }
                    const double c0 = w / a0;
                    const double w1 = w + (drift[i] * w - c0) * dt + w * noise +
                                      w * canon[i] * slope * dt;
                    if (!std::isfinite(w1)) {
                        throw Error(ErrorCode::NonFiniteState,
                                    "wealth is not finite at t = " + std::to_string(t1));
                    }
                    if (!(w1 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
                    const double c1 = w1 / a1;
                    integral += 0.5 * dt * (d0 * utility(c0) + d1 * utility(c1));
                    w = w1;
                }
            }
            return integral + terminal_discount * utility(w);
        };

        if (!uncertain) return objective(0.0);
        return integrate_quantiles(rule, [&](std::size_t k) { return objective(rule.slope[k]); });
    });

    WealthSimulation result;
    result.objective = summarize(samples, uncertain ? options.alpha_nodes : 1);
    result.rejected_paths = options.n_paths - result.objective.n_random_paths;
    if (static_cast<double>(result.rejected_paths) >
        kMaxRejectedFraction * static_cast<double>(options.n_paths)) {
        throw Error(ErrorCode::TooManyRejectedPaths,
                    std::to_string(result.rejected_paths) + " of " +
                        std::to_string(options.n_paths) + " paths reached non-positive wealth");
    }
    return result;
}

// ---------------------------------------------------------------------------
// Multiplication table

VariationReport variation_table_check(std::size_t grid_steps, std::size_t n_paths,
                                      std::uint64_t seed, double alpha) {
    if (grid_steps < 100) {
        throw Error(ErrorCode::InvalidArgument, "variation check needs at least 100 steps");
    }
    if (n_paths < 2) {
        throw Error(ErrorCode::InvalidArgument, "variation check needs at least 2 paths");
    }
    const double slope = canonical_slope(alpha);
    const std::size_t fine_steps = 2 * grid_steps;

    struct Acc {
        double qv = 0, qv2 = 0, cross = 0, cross2 = 0, mixed = 0, mixed2 = 0, err2 = 0;
        void add(double q, double c, double mx) {
            qv += q; qv2 += q * q; cross += c; cross2 += c * c; mixed += mx; mixed2 += mx * mx;
            err2 += (q - 1.0) * (q - 1.0);
        }
    } coarse_acc, fine_acc;

    std::vector<double> b1(fine_steps), b2(fine_steps);
    for (std::size_t p = 0; p < n_paths; ++p) {
        auto rng = stream_engine(seed, p);
        std::normal_distribution<double> normal;
        const double fine_dt = 1.0 / static_cast<double>(fine_steps);
        const double sd = std::sqrt(fine_dt);
        for (std::size_t k = 0; k < fine_steps; ++k) {
            b1[k] = sd * normal(rng);
            b2[k] = sd * normal(rng);
        }
        auto level = [&](std::size_t steps, std::size_t stride, Acc& acc) {
            const double dc = slope / static_cast<double>(steps);
            double q = 0, c = 0, mx = 0;
            for (std::size_t k = 0; k < steps; ++k) {
                double d1 = 0, d2 = 0;
                for (std::size_t r = 0; r < stride; ++r) {
                    d1 += b1[k * stride + r];
                    d2 += b2[k * stride + r];
                }
                q += d1 * d1;
                c += d1 * d2;
                mx += d1 * dc;
            }
            acc.add(q, c, mx);
        };
        level(fine_steps, 1, fine_acc);
        level(grid_steps, 2, coarse_acc);
    }

    const double n = static_cast<double>(n_paths);
    auto stat = [n](double sum, double sum2) {
        const double mean = sum / n;
        const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0));
        return SampleStat{mean, std::sqrt(var / n)};
    };
    auto finish = [&](std::size_t steps, const Acc& acc) {
        VariationLevel lv;
        lv.steps = steps;
        lv.dt = 1.0 / static_cast<double>(steps);
        lv.brownian_qv = stat(acc.qv, acc.qv2);
        lv.brownian_qv_rms = std::sqrt(acc.err2 / n);
        lv.brownian_cross = stat(acc.cross, acc.cross2);
        lv.mixed_cross = stat(acc.mixed, acc.mixed2);
        const double dc = slope * lv.dt;
        lv.canonical_qv = static_cast<double>(steps) * dc * dc;
        lv.canonical_time = static_cast<double>(steps) * dc * lv.dt;
        return lv;
    };
    VariationReport report;
    report.alpha = alpha;
    report.n_paths = n_paths;
    report.coarse = finish(grid_steps, coarse_acc);
    report.fine = finish(fine_steps, fine_acc);
    if (report.coarse.canonical_qv > 0.0 && report.fine.canonical_qv > 0.0) {
        report.canonical_qv_slope =
            std::log(report.fine.canonical_qv / report.coarse.canonical_qv) / std::log(2.0);
    }
    report.brownian_rms_ratio = report.coarse.brownian_qv_rms / report.fine.brownian_qv_rms;
    return report;
}

// ---------------------------------------------------------------------------
// Regime chain statistics

double RegimeStatistics::holding_mean(std::size_t i) const {
    return exits.at(i) > 0 ? time_in_state.at(i) / static_cast<double>(exits[i])
                           : std::numeric_limits<double>::infinity();
}

double RegimeStatistics::holding_std_error(std::size_t i) const {
    return exits.at(i) > 0 ? holding_mean(i) / std::sqrt(static_cast<double>(exits[i]))
                           : std::numeric_limits<double>::infinity();
}

RegimeStatistics regime_statistics(const Generator& gen, double horizon, std::size_t n_paths,
                                   std::uint64_t seed, std::optional<std::size_t> i0) {
    if (n_paths < 2) {
        throw Error(ErrorCode::InvalidArgument, "regime statistics need at least 2 paths");
    }
    const std::size_t s = gen.regimes();
    RegimeStatistics st;
    st.n_paths = n_paths;
    st.horizon = horizon;
    st.time_in_state.assign(s, 0.0);
    st.exits.assign(s, 0);
    st.transitions = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
    std::vector<double> frac_sum(s, 0.0), frac_sq(s, 0.0), frac(s);

    const Eigen::VectorXd stationary = gen.stationary_distribution();
    std::vector<double> start_weights(stationary.data(), stationary.data() + stationary.size());
    for (double& w : start_weights) w = std::max(w, 0.0);

    for (std::size_t p = 0; p < n_paths; ++p) {
        auto rng = stream_engine(seed, p);
        std::size_t start = 0;
        if (i0) {
            start = *i0;
        } else {
            std::discrete_distribution<std::size_t> pick(start_weights.begin(), start_weights.end());
            start = pick(rng);
        }
        const RegimePath path = sample_regime_path(gen, start, horizon, rng);
        std::fill(frac.begin(), frac.end(), 0.0);
        double t = 0.0;
        for (std::size_t k = 0; k < path.jumps(); ++k) {
            const std::size_t from = path.states[k];
            const std::size_t to = path.states[k + 1];
            frac[from] += path.jump_times[k] - t;
            t = path.jump_times[k];
            ++st.exits[from];
            st.transitions(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to)) += 1.0;
        }
        frac[path.states.back()] += horizon - t;
        for (std::size_t i = 0; i < s; ++i) {
            st.time_in_state[i] += frac[i];
            const double f = frac[i] / horizon;
            frac_sum[i] += f;
            frac_sq[i] += f * f;
        }
    }
    const double n = static_cast<double>(n_paths);
    for (std::size_t i = 0; i < s; ++i) {
        const double mean = frac_sum[i] / n;
        const double var = std::max(0.0, (frac_sq[i] - n * mean * mean) / (n - 1.0));
        st.occupation.push_back({mean, std::sqrt(var / n)});
    }
    return st;
}

}  // namespace rsport
