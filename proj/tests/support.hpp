#pragma once

// Shared fixtures and independent oracles. Nothing here calls into the
// solver; oracles are written directly from the model formulas.

#include "rsport/rsport.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <vector>

namespace rsport::test {

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

inline RegimeCoefficients scalar_regime(double r, double alpha, double sigma, double eta = 0.0) {
    RegimeCoefficients c;
    c.rate = r;
    c.expected_return = Eigen::VectorXd::Constant(1, alpha);
    c.volatility = Eigen::MatrixXd::Constant(1, 1, sigma);
    c.uncertain_vol = Eigen::MatrixXd::Constant(1, 1, eta);
    return c;
}

/// The two-regime market used by the shipped figure configs.
inline RegimeMarket two_regime_market(double eta = 0.0, double horizon = 1.0) {
    return RegimeMarket(Generator::validate(mat({{-1.2, 1.2}, {2.5, -2.5}})),
                        {scalar_regime(0.05, 0.15, 0.25, eta), scalar_regime(0.01, 0.25, 0.6, eta)},
                        horizon);
}

inline RegimeMarket merton_market(double r, double alpha, double sigma, double horizon = 1.0) {
    return RegimeMarket(Generator::validate(mat({{0.0}})), {scalar_regime(r, alpha, sigma)}, horizon);
}

/// ρ from its definition, for scalar-asset markets.
inline double rho_oracle(double beta, double lambda, double kappa, double r, double theta) {
    return beta + lambda - (1.0 - kappa) * r - (1.0 - kappa) / (2.0 * kappa) * theta * theta;
}

/// Exact solution of A' = aA − 1, A(T) = 1 with a = ρ/κ.
inline double merton_a(double rho, double kappa, double t, double horizon) {
    const double a = rho / kappa;
    const double e = std::exp(-a * (horizon - t));
    return (1.0 - e) / a + e;
}

/// Right-hand side of the normalized coefficient system, written out from
/// the model for scalar-asset markets.
inline std::vector<double> ode_rhs(const std::vector<double>& a, const std::vector<double>& rho,
                                   const Eigen::MatrixXd& q, double kappa) {
    const std::size_t s = a.size();
    std::vector<double> out(s);
    for (std::size_t i = 0; i < s; ++i) {
        double coupling = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            if (j == i) continue;
            coupling += q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                        std::pow(a[j], kappa) * std::pow(a[i], 1.0 - kappa);
        }
        out[i] = rho[i] / kappa * a[i] - 1.0 - coupling / kappa;
    }
    return out;
}

/// Explicit Euler marched backward with a very fine step; A(0) per regime.
inline std::vector<double> fine_euler_a0(const std::vector<double>& rho, const Eigen::MatrixXd& q,
                                         double kappa, double horizon, std::size_t steps) {
    std::vector<double> a(rho.size(), 1.0);
    const double h = horizon / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto d = ode_rhs(a, rho, q, kappa);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] -= h * d[i];
    }
    return a;
}

/// ρ for the two shipped regimes under (κ, β).
inline std::vector<double> two_regime_rho(double kappa, double beta) {
    return {rho_oracle(beta, 1.2, kappa, 0.05, 0.4), rho_oracle(beta, 2.5, kappa, 0.01, 0.4)};
}

inline double z_of(double mean, double target, double se) {
    return se > 0.0 ? std::abs(mean - target) / se : (mean == target ? 0.0 : INFINITY);
}

}  // namespace rsport::test
