#pragma once

#include "rsport/market.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace rsport {

/// CRRA preferences U(z) = z^{1-κ}/(1-κ) for both consumption and terminal
/// wealth, discounted at rate β.
class UtilitySpec {
public:
    /// Throws InvalidUtility unless κ > 0, |κ - 1| > 1e-9 and β ≥ 0.
    UtilitySpec(double risk_aversion, double discount_rate);

    double risk_aversion() const noexcept { return kappa_; }
    double discount_rate() const noexcept { return beta_; }

    double utility(double z) const;
    double marginal(double z) const;
    /// Inverse of the marginal utility, Ψ(y) = y^{-1/κ}.
    double inverse_marginal(double y) const;

private:
    double kappa_;
    double beta_;
};

/// ρ_i = β + λ_i - (1-κ) r_i - ((1-κ)/(2κ)) |θ_i|².
struct RhoVector {
    std::vector<double> rho;

    double operator[](std::size_t i) const { return rho.at(i); }
    std::size_t size() const noexcept { return rho.size(); }
};

RhoVector compute_rho(const RegimeMarket& mkt, const UtilitySpec& util);

/// Right-hand side of the normalized coefficient system
///   A_i' = (ρ_i/κ) A_i - 1 - (1/κ) Σ_{j≠i} q_ij A_j^κ A_i^{1-κ},
/// valid while every A_i > 0.
class CoefficientOde {
public:
    CoefficientOde(const RegimeMarket& mkt, const UtilitySpec& util);

    std::size_t regimes() const noexcept { return rho_.size(); }
    const RhoVector& rho() const noexcept { return rho_; }

    void derivative(std::span<const double> a, std::span<double> out) const;

private:
    RhoVector rho_;
    Eigen::MatrixXd q_;
    double kappa_;
};

/// A_i(t_k) for every regime on a uniform grid t_0 = 0, ..., t_N = T, with the
/// slopes A_i'(t_k) implied by the ODE at the stored values.
class SolutionGrid {
public:
    /// Row k of `values`/`slopes` holds regime values at times[k].
    /// Throws InvalidArgument on inconsistent shapes or a non-uniform grid,
    /// NonFinite on non-finite entries.
    SolutionGrid(std::vector<double> times, Eigen::MatrixXd values, Eigen::MatrixXd slopes);

    std::size_t nodes() const noexcept { return times_.size(); }
    std::size_t regimes() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    double step() const noexcept { return step_; }
    double horizon() const noexcept { return times_.back(); }

    const std::vector<double>& times() const noexcept { return times_; }
    double value(std::size_t k, std::size_t i) const { return values_(k, i); }
    double slope(std::size_t k, std::size_t i) const { return slopes_(k, i); }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const Eigen::MatrixXd& slopes() const noexcept { return slopes_; }

    /// Cubic Hermite interpolant of A_i at t, exact at nodes.
    /// Throws OutOfRange outside [0, T].
    double interpolate(double t, std::size_t i) const;
    /// Derivative of the same interpolant.
    double interpolate_slope(double t, std::size_t i) const;

private:
    std::size_t locate(double t) const;

    std::vector<double> times_;
    Eigen::MatrixXd values_;
    Eigen::MatrixXd slopes_;
    double step_;
};

inline constexpr double kPositivityFloor = 1e-12;
inline constexpr std::size_t kDefaultSolverSteps = 2000;

/// Integrates the coefficient system backward from A_i(T) = 1 with classical
/// RK4 at the fixed step T/steps. Any stage value ≤ 1e-12 aborts with
/// NonPositiveA; overflow or NaN aborts with NonFinite. Requires steps ≥ 10.
SolutionGrid solve_backward(const RegimeMarket& mkt, const UtilitySpec& util,
                            std::size_t steps = kDefaultSolverSteps);

/// Free-function form of SolutionGrid::interpolate.
inline double interpolate(const SolutionGrid& grid, double t, std::size_t i) {
    return grid.interpolate(t, i);
}

}  // namespace rsport
