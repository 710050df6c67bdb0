#include "rsport/hjb_ode.hpp"

#include "rsport/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rsport {

UtilitySpec::UtilitySpec(double risk_aversion, double discount_rate)
    : kappa_(risk_aversion), beta_(discount_rate) {
    if (!(std::isfinite(kappa_) && kappa_ > 0.0)) {
        throw Error(ErrorCode::InvalidUtility, "risk aversion must be positive and finite");
    }
    if (std::abs(kappa_ - 1.0) <= 1e-9) {
        throw Error(ErrorCode::InvalidUtility, "log utility (kappa = 1) is not supported");
    }
    if (!(std::isfinite(beta_) && beta_ >= 0.0)) {
        throw Error(ErrorCode::InvalidUtility, "discount rate must be nonnegative and finite");
    }
}

double UtilitySpec::utility(double z) const { return std::pow(z, 1.0 - kappa_) / (1.0 - kappa_); }

double UtilitySpec::marginal(double z) const { return std::pow(z, -kappa_); }

double UtilitySpec::inverse_marginal(double y) const { return std::pow(y, -1.0 / kappa_); }

RhoVector compute_rho(const RegimeMarket& mkt, const UtilitySpec& util) {
    const auto theta = market_price_of_risk(mkt);
    const double kappa = util.risk_aversion();
    RhoVector out;
    out.rho.reserve(mkt.regimes());
    for (std::size_t i = 0; i < mkt.regimes(); ++i) {
        out.rho.push_back(util.discount_rate() + mkt.exit_rate(i) -
                          (1.0 - kappa) * mkt.regime(i).rate -
                          (1.0 - kappa) / (2.0 * kappa) * theta.squared_norm(i));
    }
    return out;
}

CoefficientOde::CoefficientOde(const RegimeMarket& mkt, const UtilitySpec& util)
    : rho_(compute_rho(mkt, util)),
      q_(mkt.generator().rates()),
      kappa_(util.risk_aversion()) {}

void CoefficientOde::derivative(std::span<const double> a, std::span<double> out) const {
    const std::size_t s = rho_.size();
    for (std::size_t i = 0; i < s; ++i) {
        double coupling = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            if (j == i) continue;
            const double qij = q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (qij == 0.0) continue;
            // A_j^κ A_i^{1-κ} written as A_i (A_j/A_i)^κ
            coupling += qij * a[i] * std::pow(a[j] / a[i], kappa_);
        }
        out[i] = rho_.rho[i] / kappa_ * a[i] - 1.0 - coupling / kappa_;
    }
}

SolutionGrid::SolutionGrid(std::vector<double> times, Eigen::MatrixXd values,
                           Eigen::MatrixXd slopes)
    : times_(std::move(times)), values_(std::move(values)), slopes_(std::move(slopes)) {
    const auto n = static_cast<Eigen::Index>(times_.size());
    if (times_.size() < 2 || values_.rows() != n || slopes_.rows() != n ||
        values_.cols() != slopes_.cols() || values_.cols() == 0) {
        throw Error(ErrorCode::InvalidArgument, "solution grid shapes are inconsistent");
    }
    if (times_.front() != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "solution grid must start at t = 0");
    }
    step_ = times_.back() / static_cast<double>(times_.size() - 1);
    for (std::size_t k = 1; k < times_.size(); ++k) {
        const double dt = times_[k] - times_[k - 1];
        if (!(std::abs(dt - step_) <= 1e-9 * step_)) {
            throw Error(ErrorCode::InvalidArgument, "solution grid must be uniform and ascending");
        }
    }
    if (!values_.allFinite() || !slopes_.allFinite()) {
        throw Error(ErrorCode::NonFinite, "solution grid holds non-finite values");
    }
}

std::size_t SolutionGrid::locate(double t) const {
    if (!(t >= 0.0 && t <= times_.back())) {
        throw Error(ErrorCode::OutOfRange, "t = " + std::to_string(t) + " outside [0, T]");
    }
    const auto last = times_.size() - 2;
    auto k = static_cast<std::size_t>(t / step_);
    k = std::min(k, last);
    // Guard against t/step rounding across a node.
    if (t < times_[k] && k > 0) --k;
    if (t > times_[k + 1] && k < last) ++k;
    return k;
}

double SolutionGrid::interpolate(double t, std::size_t i) const {
    const std::size_t k = locate(t);
    const auto col = static_cast<Eigen::Index>(i);
    const auto r0 = static_cast<Eigen::Index>(k);
    if (t == times_[k]) return values_(r0, col);
    if (t == times_[k + 1]) return values_(r0 + 1, col);
    const double h = times_[k + 1] - times_[k];
    const double s = (t - times_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * values_(r0, col) + h10 * h * slopes_(r0, col) + h01 * values_(r0 + 1, col) +
           h11 * h * slopes_(r0 + 1, col);
}

double SolutionGrid::interpolate_slope(double t, std::size_t i) const {
    const std::size_t k = locate(t);
    const auto col = static_cast<Eigen::Index>(i);
    const auto r0 = static_cast<Eigen::Index>(k);
    if (t == times_[k]) return slopes_(r0, col);
    if (t == times_[k + 1]) return slopes_(r0 + 1, col);
    const double h = times_[k + 1] - times_[k];
    const double s = (t - times_[k]) / h;
    const double s2 = s * s;
    const double d00 = 6 * s2 - 6 * s;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = -6 * s2 + 6 * s;
    const double d11 = 3 * s2 - 2 * s;
    return (d00 * values_(r0, col) + d01 * values_(r0 + 1, col)) / h +
           d10 * slopes_(r0, col) + d11 * slopes_(r0 + 1, col);
}

namespace {

void check_stage(std::span<const double> a, double t) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::isfinite(a[i])) {
            throw Error(ErrorCode::NonFinite, "A_" + std::to_string(i + 1) +
                                                  " is not finite near t = " + std::to_string(t));
        }
        if (a[i] <= kPositivityFloor) {
            throw Error(ErrorCode::NonPositiveA, "A_" + std::to_string(i + 1) + " = " +
                                                     std::to_string(a[i]) + " near t = " +
                                                     std::to_string(t));
        }
    }
}

void check_slopes(std::span<const double> d, double t) {
    for (double v : d) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFinite, "ODE slope is not finite near t = " + std::to_string(t));
        }
    }
}

}  // namespace

SolutionGrid solve_backward(const RegimeMarket& mkt, const UtilitySpec& util, std::size_t steps) {
    if (steps < 10) {
        throw Error(ErrorCode::InvalidArgument, "solver needs at least 10 steps");
    }
    const CoefficientOde ode(mkt, util);
    const std::size_t s = ode.regimes();
    const double horizon = mkt.horizon();
    const double h = horizon / static_cast<double>(steps);

    std::vector<double> times(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    }
    times[steps] = horizon;

    Eigen::MatrixXd values(static_cast<Eigen::Index>(steps + 1), static_cast<Eigen::Index>(s));
    Eigen::MatrixXd slopes(values.rows(), values.cols());

    std::vector<double> a(s, 1.0), stage(s), k1(s), k2(s), k3(s), k4(s);
    auto store = [&](std::size_t row, std::span<const double> d) {
        for (std::size_t i = 0; i < s; ++i) {
            values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) = a[i];
            slopes(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) = d[i];
        }
    };

    // Backward in t: each step moves from times[k] to times[k-1].
    ode.derivative(a, k1);
    check_slopes(k1, horizon);
    store(steps, k1);
    for (std::size_t k = steps; k > 0; --k) {
        const double t = times[k];
        for (std::size_t i = 0; i < s; ++i) stage[i] = a[i] - 0.5 * h * k1[i];
        check_stage(stage, t - 0.5 * h);
        ode.derivative(stage, k2);
        for (std::size_t i = 0; i < s; ++i) stage[i] = a[i] - 0.5 * h * k2[i];
        check_stage(stage, t - 0.5 * h);
        ode.derivative(stage, k3);
        for (std::size_t i = 0; i < s; ++i) stage[i] = a[i] - h * k3[i];
        check_stage(stage, t - h);
        ode.derivative(stage, k4);
        for (std::size_t i = 0; i < s; ++i) {
            a[i] -= h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_stage(a, times[k - 1]);
        ode.derivative(a, k1);
        check_slopes(k1, times[k - 1]);
        store(k - 1, k1);
    }
    return SolutionGrid(std::move(times), std::move(values), std::move(slopes));
}

}  // namespace rsport
