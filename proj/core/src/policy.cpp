#include "rsport/policy.hpp"

#include "rsport/error.hpp"
#include "rsport/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rsport {

PolicyMap::PolicyMap(RegimeMarket market, UtilitySpec utility, SolutionGrid grid)
    : market_(std::move(market)),
      utility_(utility),
      grid_(std::move(grid)),
      theta_(market_price_of_risk(market_)) {
    if (grid_.regimes() != market_.regimes()) {
        throw Error(ErrorCode::DimensionMismatch, "grid and market disagree on regime count");
    }
    if (std::abs(grid_.horizon() - market_.horizon()) > 1e-12 * market_.horizon()) {
        throw Error(ErrorCode::DimensionMismatch, "grid and market disagree on horizon");
    }
    const double kappa = utility_.risk_aversion();
    for (std::size_t i = 0; i < market_.regimes(); ++i) {
        portfolio_.push_back(solve_volatility(market_.regime(i).volatility, theta_[i], true) /
                             kappa);
        gram_.push_back(gram_matrix(market_, i));
    }
}

void PolicyMap::check(double t, double x, std::size_t i) const {
    if (!(x > 0.0)) {
        throw Error(ErrorCode::NonPositiveWealth, "wealth must be positive, got " + std::to_string(x));
    }
    if (i >= regimes()) {
        throw Error(ErrorCode::OutOfRange, "regime index " + std::to_string(i));
    }
    if (!(t >= 0.0 && t <= horizon())) {
        throw Error(ErrorCode::OutOfRange, "t = " + std::to_string(t) + " outside [0, T]");
    }
}

double PolicyMap::value(double t, double x, std::size_t i) const {
    check(t, x, i);
    const double kappa = utility_.risk_aversion();
    return std::pow(coefficient(t, i), kappa) * std::pow(x, 1.0 - kappa) / (1.0 - kappa);
}

double PolicyMap::value_x(double t, double x, std::size_t i) const {
    check(t, x, i);
    const double kappa = utility_.risk_aversion();
    return std::pow(coefficient(t, i), kappa) * std::pow(x, -kappa);
}

double PolicyMap::value_xx(double t, double x, std::size_t i) const {
    check(t, x, i);
    const double kappa = utility_.risk_aversion();
    return -kappa * std::pow(coefficient(t, i), kappa) * std::pow(x, -kappa - 1.0);
}

double PolicyMap::value_t(double t, double x, std::size_t i) const {
    check(t, x, i);
    const double kappa = utility_.risk_aversion();
    const double a = coefficient(t, i);
    return kappa * std::pow(a, kappa - 1.0) * grid_.interpolate_slope(t, i) *
           std::pow(x, 1.0 - kappa) / (1.0 - kappa);
}

double PolicyMap::optimal_consumption(double t, double x, std::size_t i) const {
    check(t, x, i);
    return x / coefficient(t, i);
}

double PolicyMap::hamiltonian(double t, double x, std::size_t i, const Eigen::VectorXd& pi,
                              double c) const {
    const double v = value(t, x, i);
    const double vx = value_x(t, x, i);
    const double vxx = value_xx(t, x, i);
    const double vt = value_t(t, x, i);
    const auto& coeffs = market_.regime(i);
    const double quad = pi.dot(gram_[i] * pi);
    const double excess = pi.dot(coeffs.volatility * theta_[i]);
    double coupling = -market_.exit_rate(i) * v;
    for (std::size_t j = 0; j < regimes(); ++j) {
        if (j != i) coupling += market_.generator().rate(i, j) * value(t, x, j);
    }
    return 0.5 * x * x * quad * vxx + x * excess * vx + coeffs.rate * x * vx - c * vx -
           utility_.discount_rate() * v + vt + coupling + utility_.utility(c);
}

PolicyPoint general_policy_from_value(double vx, double vxx, double x, std::size_t i,
                                      const RegimeMarket& mkt, const UtilitySpec& util) {
    if (!(x > 0.0)) {
        throw Error(ErrorCode::NonPositiveWealth, "wealth must be positive");
    }
    if (!(vx > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "V_x must be positive");
    }
    if (!(vxx < 0.0)) {
        throw Error(ErrorCode::NonConcavePoint, "V_xx must be negative");
    }
    if (i >= mkt.regimes()) {
        throw Error(ErrorCode::OutOfRange, "regime index " + std::to_string(i));
    }
    const auto theta = market_price_of_risk(mkt);
    const Eigen::VectorXd direction = solve_volatility(mkt.regime(i).volatility, theta[i], true);
    return {util.inverse_marginal(vx), -(vx / (x * vxx)) * direction};
}

HjbResidualReport hjb_residual(const PolicyMap& pm, std::span<const double> t_grid,
                               std::span<const double> x_grid) {
    const auto& mkt = pm.market();
    const auto& q = mkt.generator().rates();
    const double kappa = pm.utility().risk_aversion();
    const double beta = pm.utility().discount_rate();
    HjbResidualReport report;
    report.max_rel_residual = -1.0;
    std::vector<double> values(pm.regimes());
    for (double t : t_grid) {
        for (double x : x_grid) {
            for (std::size_t j = 0; j < pm.regimes(); ++j) values[j] = pm.value(t, x, j);
            for (std::size_t i = 0; i < pm.regimes(); ++i) {
                const double v = values[i];
                const double vx = pm.value_x(t, x, i);
                const double vxx = pm.value_xx(t, x, i);
                const double terms[] = {
                    pm.value_t(t, x, i),
                    -beta * v,
                    mkt.regime(i).rate * x * vx,
                    kappa / (1.0 - kappa) * std::pow(vx, (kappa - 1.0) / kappa),
                    -pm.theta().squared_norm(i) * vx * vx / (2.0 * vxx),
                    -mkt.exit_rate(i) * v,
                };
                double residual = 0.0;
                double scale = 0.0;
                for (double term : terms) {
                    residual += term;
                    scale += std::abs(term);
                }
                for (std::size_t j = 0; j < pm.regimes(); ++j) {
                    if (j == i) continue;
                    const double term = q(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)) * values[j];
                    residual += term;
                    scale += std::abs(term);
                }
                const double abs_res = std::abs(residual);
                const double rel = scale > 0.0 ? abs_res / scale : abs_res;
                report.max_abs_residual = std::max(report.max_abs_residual, abs_res);
                if (rel > report.max_rel_residual) {
                    report.max_rel_residual = rel;
                    report.worst_point = {t, x, i};
                }
            }
        }
    }
    if (report.max_rel_residual < 0.0) report.max_rel_residual = 0.0;
    return report;
}

ArgmaxReport hamiltonian_argmax_check(const PolicyMap& pm, double t, double x, std::size_t i,
                                      std::size_t trials, std::uint64_t seed) {
    const Eigen::VectorXd& pi_hat = pm.optimal_portfolio(i);
    const double c_hat = pm.optimal_consumption(t, x, i);
    ArgmaxReport report;
    report.trials = trials;
    report.candidate = pm.hamiltonian(t, x, i, pi_hat, c_hat);
    report.max_excess = -std::numeric_limits<double>::infinity();

    auto rng = stream_engine(seed, 0);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> log_scale(-4.0, 0.0);
    const double pi_scale = std::max(pi_hat.lpNorm<Eigen::Infinity>(), 0.1);
    Eigen::VectorXd pi(pi_hat.size());
    for (std::size_t k = 0; k < trials; ++k) {
        const double scale = std::pow(10.0, log_scale(rng));
        for (Eigen::Index a = 0; a < pi.size(); ++a) {
            pi(a) = pi_hat(a) + scale * pi_scale * normal(rng);
        }
        const double c = c_hat * std::exp(scale * normal(rng));
        const double sample = pm.hamiltonian(t, x, i, pi, c);
        report.max_excess = std::max(report.max_excess, sample - report.candidate);
    }
    if (trials == 0) report.max_excess = 0.0;
    report.attained = report.max_excess <= kArgmaxSlack;
    return report;
}

}  // namespace rsport
