#pragma once

#include "rsport/hjb_ode.hpp"
#include "rsport/market.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rsport {

/// Closed-form CRRA value function V(t,x,i) = A_i(t)^κ x^{1-κ}/(1-κ) and its
/// optimal feedback policy, built from a solved coefficient grid.
class PolicyMap {
public:
    /// Throws DimensionMismatch when the grid's regime count or horizon does
    /// not match the market.
    PolicyMap(RegimeMarket market, UtilitySpec utility, SolutionGrid grid);

    const RegimeMarket& market() const noexcept { return market_; }
    const UtilitySpec& utility() const noexcept { return utility_; }
    const SolutionGrid& grid() const noexcept { return grid_; }
    const MarketPriceOfRisk& theta() const noexcept { return theta_; }
    std::size_t regimes() const noexcept { return market_.regimes(); }
    double horizon() const noexcept { return market_.horizon(); }

    double coefficient(double t, std::size_t i) const { return grid_.interpolate(t, i); }

    /// V(t, x, i). Throws NonPositiveWealth for x ≤ 0.
    double value(double t, double x, std::size_t i) const;
    double value_x(double t, double x, std::size_t i) const;
    double value_xx(double t, double x, std::size_t i) const;
    /// ∂V/∂t through the grid's ODE-implied slope of A_i.
    double value_t(double t, double x, std::size_t i) const;

    /// ĉ = x / A_i(t).
    double optimal_consumption(double t, double x, std::size_t i) const;

    /// π̂ = (1/κ)(σ_iᵀ)⁻¹θ_i; constant in t and x.
    const Eigen::VectorXd& optimal_portfolio(std::size_t i) const { return portfolio_.at(i); }

    /// Bracketed expression of the optimality equation for an arbitrary
    /// control: 𝕃_i(π,c)V + U(c), with
    /// 𝕃_i(π,c)V = ½x²πᵀΛ_iπV_xx + xπᵀσ_iθ_iV_x + r_i x V_x - cV_x - βV + V_t
    ///             + Σ_j q_ij V(t,x,j).
    double hamiltonian(double t, double x, std::size_t i, const Eigen::VectorXd& pi,
                       double c) const;

private:
    void check(double t, double x, std::size_t i) const;

    RegimeMarket market_;
    UtilitySpec utility_;
    SolutionGrid grid_;
    MarketPriceOfRisk theta_;
    std::vector<Eigen::VectorXd> portfolio_;
    std::vector<Eigen::MatrixXd> gram_;
};

struct PolicyPoint {
    double consumption;
    Eigen::VectorXd portfolio;
};

/// Generic optimal policy from value-function derivatives:
/// c = Ψ(V_x) = V_x^{-1/κ}, π = -(V_x/(x V_xx)) (σ_iᵀ)⁻¹θ_i.
/// Throws NonConcavePoint unless V_xx < 0, InvalidArgument unless V_x > 0,
/// NonPositiveWealth unless x > 0.
PolicyPoint general_policy_from_value(double vx, double vxx, double x, std::size_t i,
                                      const RegimeMarket& mkt, const UtilitySpec& util);

struct HjbResidualReport {
    double max_abs_residual = 0.0;
    double max_rel_residual = 0.0;
    struct Point {
        double t = 0.0;
        double x = 0.0;
        std::size_t regime = 0;
    } worst_point;
};

/// Residual of the CRRA optimality equation
///   V_t - βV + r_i x V_x + (κ/(1-κ)) V_x^{(κ-1)/κ} - |θ_i|² V_x²/(2V_xx)
///     - λ_i V + Σ_{j≠i} q_ij V(t,x,j)
/// over every (t, x, i) of the given grids. The relative residual at a point
/// divides by the sum of the absolute values of the terms.
HjbResidualReport hjb_residual(const PolicyMap& pm, std::span<const double> t_grid,
                               std::span<const double> x_grid);

struct ArgmaxReport {
    bool attained = false;     ///< candidate ≥ every sample - slack
    double candidate = 0.0;    ///< bracket value at (ĉ, π̂)
    double max_excess = 0.0;   ///< max over samples of (sample - candidate)
    std::size_t trials = 0;
};

inline constexpr double kArgmaxSlack = 1e-9;

/// Samples random controls (π, c) around (π̂, ĉ) at multiplicative scales
/// from 1e-4 to 1 and compares the bracket value against the candidate.
ArgmaxReport hamiltonian_argmax_check(const PolicyMap& pm, double t, double x, std::size_t i,
                                      std::size_t trials, std::uint64_t seed);

}  // namespace rsport
