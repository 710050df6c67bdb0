#pragma once

#include "rsport/market.hpp"
#include "rsport/policy.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <numbers>
#include <random>
#include <vector>

namespace rsport {

// ---------------------------------------------------------------------------
// Regime chain

/// Right-continuous step path of the regime chain on [0, T].
struct RegimePath {
    double horizon = 0.0;
    std::vector<double> jump_times;   ///< strictly increasing, inside (0, T)
    std::vector<std::size_t> states;  ///< states[0] = initial, states[k+1] after jump k

    std::size_t initial() const { return states.front(); }
    std::size_t jumps() const noexcept { return jump_times.size(); }
    std::size_t state_at(double t) const;
};

/// Holding time in state i is Exp(λ_i); the next state is j ≠ i with
/// probability q_ij/λ_i. Absorbing states (λ_i = 0) never jump.
RegimePath sample_regime_path(const Generator& gen, std::size_t i0, double horizon,
                              std::mt19937_64& rng);
RegimePath sample_regime_path(const Generator& gen, std::size_t i0, double horizon,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Canonical process

/// √3/π: scale of the normal uncertainty distribution with unit variance rate.
inline constexpr double kCanonicalScale = 1.7320508075688772 / std::numbers::pi;

/// Slope of the α-path, C_t^α = slope·t. Throws DegenerateQuantile unless 0 < α < 1.
double canonical_slope(double alpha);

struct UniformGrid {
    double horizon = 1.0;
    std::size_t steps = 1;

    double step() const noexcept { return horizon / static_cast<double>(steps); }
    double time(std::size_t k) const noexcept {
        return k == steps ? horizon : horizon * static_cast<double>(k) / static_cast<double>(steps);
    }
};

/// C_{t_k}^α at every grid node.
std::vector<double> canonical_alpha_path(double alpha, const UniformGrid& grid);

/// Gauss-Legendre rule for integrating over the quantile level α ∈ (0, 1).
/// Nodes come in mirrored pairs about α = 0.5; `slope[k]` is the α-path
/// slope at node k and is exactly antisymmetric across each pair.
struct QuantileRule {
    std::vector<double> alpha;
    std::vector<double> weight;  ///< sums to 1
    std::vector<double> slope;
    std::vector<std::size_t> mirror;  ///< index of the paired node (self for α = 0.5)
};

QuantileRule gauss_legendre_quantiles(std::size_t nodes);

// ---------------------------------------------------------------------------
// Hybrid paths

/// dX = f(t,X,i)dt + g(t,X,i)dB + h(t,X,i)dC with the control already
/// substituted into the coefficients.
struct HybridSDE {
    using Drift = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, std::size_t)>;
    using Loading = std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&, std::size_t)>;

    std::size_t state_dim = 1;
    std::size_t brownian_dim = 1;
    std::size_t canonical_dim = 1;
    Eigen::VectorXd initial;
    Drift drift;              ///< p-vector
    Loading brownian_coeff;   ///< p×m
    Loading canonical_coeff;  ///< p×n
};

/// The random part of one draw: the regime path and Brownian increments on
/// the uniform grid refined at every regime jump time.
///
/// Segment s covers [seg_start[s], seg_start[s] + seg_length[s]] in regime
/// seg_regime[s]; step k owns segments step_begin[k] .. step_begin[k+1]-1.
struct RandomDraw {
    UniformGrid grid;
    RegimePath regimes;
    std::vector<double> seg_start;
    std::vector<double> seg_length;
    std::vector<std::size_t> seg_regime;
    Eigen::MatrixXd seg_brownian;  ///< segments × m
    std::vector<std::size_t> step_begin;

    std::size_t segments() const noexcept { return seg_start.size(); }
    /// Sum of the segment increments inside step k.
    Eigen::VectorXd step_increment(std::size_t k) const;
};

RandomDraw sample_random_draw(const Generator& gen, std::size_t i0, const UniformGrid& grid,
                              std::size_t brownian_dim, std::mt19937_64& rng);

/// One realized hybrid path: regime, Brownian, canonical α-path and state.
struct HybridPathBundle {
    std::vector<double> times;
    std::vector<std::size_t> regimes;  ///< regime at each node (right-continuous)
    Eigen::MatrixXd brownian;          ///< steps × m increments
    double alpha = 0.5;
    double canonical_slope = 0.0;      ///< C_t = slope·t in every canonical dimension
    Eigen::MatrixXd state;             ///< nodes × p

    std::size_t steps() const noexcept { return times.size() - 1; }
    /// B at node k.
    Eigen::VectorXd brownian_at(std::size_t k) const;
    /// C^α at node k (common to all canonical dimensions).
    double canonical_at(std::size_t k) const { return canonical_slope * times.at(k); }
};

/// Advances the state from node k to node k+1, splitting the step at any
/// regime jump inside it so each piece uses the regime at its left end:
/// x ← x + f·Δt + g·ΔB + h·ΔC^α. Throws NonFiniteState.
Eigen::VectorXd euler_step(const HybridSDE& sde, const RandomDraw& draw, double alpha_slope,
                           const Eigen::VectorXd& state, std::size_t k);

/// Builds the full bundle for one α-level from a sampled draw.
HybridPathBundle simulate_path(const HybridSDE& sde, const RandomDraw& draw, double alpha);
/// Same, with the α-path slope supplied (e.g. the antisymmetric rule slopes).
HybridPathBundle simulate_path(const HybridSDE& sde, const RandomDraw& draw, double alpha,
                               double slope);

// ---------------------------------------------------------------------------
// Chance expectation

struct ChanceEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_random_paths = 0;
    std::size_t n_alpha_nodes = 0;
};

struct SimulationOptions {
    std::size_t n_paths = 100000;
    std::size_t steps = 1000;
    std::size_t alpha_nodes = 16;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

using PathFunctional = std::function<double(const HybridPathBundle&)>;

/// E_P[E_U[F]]: for each random draw, integrates F over the α-paths of the
/// quantile rule (inner uncertain expectation), then averages over draws.
/// Exact for functionals monotone in the canonical path. Requires
/// alpha_nodes ≥ 3 and n_paths ≥ 1.
ChanceEstimate chance_expectation(const PathFunctional& functional, const HybridSDE& sde,
                                  const Generator& gen, std::size_t i0, double horizon,
                                  const SimulationOptions& options);

// ---------------------------------------------------------------------------
// Wealth under the closed-form policy

struct WealthSimulation {
    ChanceEstimate objective;      ///< estimate of J(0, x0, i0)
    std::size_t rejected_paths = 0;
};

inline constexpr double kMaxRejectedFraction = 1e-3;

/// Closed-loop Euler simulation of the wealth equation with c = ĉ(t,W,ζ),
/// π = π̂(ζ); accumulates ∫e^{-βs}U(ĉ)ds by the trapezoid rule plus
/// e^{-βT}U(W_T). Draws whose wealth reaches W ≤ 0 at any α-node are
/// rejected; more than 0.1% rejected throws TooManyRejectedPaths.
WealthSimulation simulate_wealth(const PolicyMap& pm, double x0, std::size_t i0,
                                 const SimulationOptions& options);

// ---------------------------------------------------------------------------
// Multiplication table

struct SampleStat {
    double mean = 0.0;
    double std_error = 0.0;
};

struct VariationLevel {
    std::size_t steps = 0;
    double dt = 0.0;
    SampleStat brownian_qv;       ///< Σ(ΔB¹)² over [0,1]
    double brownian_qv_rms = 0.0; ///< RMS of Σ(ΔB¹)² - 1
    SampleStat brownian_cross;    ///< Σ ΔB¹ΔB²
    double canonical_qv = 0.0;    ///< Σ(ΔC^α)², deterministic
    double canonical_time = 0.0;  ///< Σ ΔC^α Δt, deterministic
    SampleStat mixed_cross;       ///< Σ ΔB¹ΔC^α
};

struct VariationReport {
    double alpha = 0.9;
    std::size_t n_paths = 0;
    VariationLevel coarse;
    VariationLevel fine;           ///< twice the steps, same sampled paths
    double canonical_qv_slope = 0.0;  ///< d log QV / d log steps
    double brownian_rms_ratio = 0.0;  ///< coarse RMS / fine RMS, ≈ √2
};

/// Empirical check of dB·dB = dt, dB^k·dB^l = 0, dC·dC = dC·dt = dB·dC = 0
/// on [0, 1]. Requires grid_steps ≥ 100.
VariationReport variation_table_check(std::size_t grid_steps, std::size_t n_paths,
                                      std::uint64_t seed, double alpha = 0.9);

// ---------------------------------------------------------------------------
// Regime chain statistics

struct RegimeStatistics {
    std::size_t n_paths = 0;
    double horizon = 0.0;
    std::vector<double> time_in_state;      ///< summed over paths
    std::vector<std::size_t> exits;         ///< completed sojourns per state
    Eigen::MatrixXd transitions;            ///< jump counts i → j
    std::vector<SampleStat> occupation;     ///< per-path fraction of [0, T] in each state

    /// Censored-exponential estimate of 1/λ_i: total time in i over exits from i.
    double holding_mean(std::size_t i) const;
    double holding_std_error(std::size_t i) const;
};

/// Samples n_paths regime paths on [0, T]. The initial state is `i0` when
/// given, otherwise drawn from the stationary distribution.
RegimeStatistics regime_statistics(const Generator& gen, double horizon, std::size_t n_paths,
                                   std::uint64_t seed,
                                   std::optional<std::size_t> i0 = std::nullopt);

}  // namespace rsport
