#include "rsport/market.hpp"

#include "rsport/error.hpp"

#include <cmath>
#include <string>

namespace rsport {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// Nodes reachable from `start` along positive off-diagonal rates.
std::vector<bool> reachable_from(const Eigen::MatrixXd& q, Eigen::Index start) {
    const Eigen::Index n = q.rows();
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> stack{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!stack.empty()) {
        const Eigen::Index i = stack.back();
        stack.pop_back();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i && q(i, j) > 0.0 && !seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = true;
                stack.push_back(j);
            }
        }
    }
    return seen;
}

}  // namespace

Generator Generator::validate(Eigen::MatrixXd q) {
    if (q.rows() != q.cols() || q.rows() == 0) {
        throw Error(ErrorCode::NotSquare, "generator must be a non-empty square matrix");
    }
    if (!all_finite(q)) {
        throw Error(ErrorCode::NonFiniteInput, "generator has non-finite entries");
    }
    const Eigen::Index n = q.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && q(i, j) < 0.0) {
                throw Error(ErrorCode::NegativeOffDiagonal,
                            "q(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") < 0");
            }
        }
    }
    const double scale = q.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sum = q.row(i).sum();
        if (std::abs(sum) > 1e-12 * scale) {
            throw Error(ErrorCode::NonZeroRowSum, "row " + std::to_string(i + 1) +
                                                      " sums to " + std::to_string(sum));
        }
    }
    if (n >= 2) {
        // Strong connectivity: every node reaches every other node.
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto seen = reachable_from(q, i);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!seen[static_cast<std::size_t>(j)]) {
                    throw Error(ErrorCode::Reducible, "regime " + std::to_string(j + 1) +
                                                          " unreachable from regime " +
                                                          std::to_string(i + 1));
                }
            }
        }
    }
    return Generator(std::move(q));
}

Eigen::VectorXd Generator::stationary_distribution() const {
    const Eigen::Index n = q_.rows();
    if (n == 1) return Eigen::VectorXd::Ones(1);
    // Replace one balance equation with the normalization Σp = 1.
    Eigen::MatrixXd a = q_.transpose();
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    return a.fullPivLu().solve(b);
}

RegimeMarket::RegimeMarket(Generator generator, std::vector<RegimeCoefficients> regimes,
                           double horizon)
    : generator_(std::move(generator)), regimes_(std::move(regimes)), horizon_(horizon) {
    if (!(std::isfinite(horizon_) && horizon_ > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "horizon must be positive and finite");
    }
    if (regimes_.size() != generator_.regimes()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "generator has " + std::to_string(generator_.regimes()) + " regimes but " +
                        std::to_string(regimes_.size()) + " coefficient sets were given");
    }
    assets_ = static_cast<std::size_t>(regimes_.front().expected_return.size());
    canonical_dims_ = static_cast<std::size_t>(regimes_.front().uncertain_vol.cols());
    if (assets_ == 0) {
        throw Error(ErrorCode::DimensionMismatch, "at least one risky asset is required");
    }
    const auto m = static_cast<Eigen::Index>(assets_);
    const auto n = static_cast<Eigen::Index>(canonical_dims_);
    for (std::size_t i = 0; i < regimes_.size(); ++i) {
        const auto& c = regimes_[i];
        const std::string tag = "regime " + std::to_string(i + 1);
        if (c.expected_return.size() != m || c.volatility.rows() != m ||
            c.volatility.cols() != m || c.uncertain_vol.rows() != m ||
            c.uncertain_vol.cols() != n) {
            throw Error(ErrorCode::DimensionMismatch, tag + ": inconsistent coefficient shapes");
        }
        if (!std::isfinite(c.rate) || !all_finite(c.expected_return) ||
            !all_finite(c.volatility) || !all_finite(c.uncertain_vol)) {
            throw Error(ErrorCode::NonFiniteInput, tag + ": non-finite coefficient");
        }
        const Eigen::MatrixXd gram = c.volatility * c.volatility.transpose();
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) {
            throw Error(ErrorCode::NotPositiveDefinite, tag + ": sigma sigma^T is not positive definite");
        }
    }
}

Eigen::VectorXd solve_volatility(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& rhs,
                                 bool transposed) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(transposed ? Eigen::MatrixXd(sigma.transpose())
                                                       : sigma);
    if (!(lu.rcond() > 1e-12)) {
        throw Error(ErrorCode::SingularVolatility, "volatility matrix is numerically singular");
    }
    return lu.solve(rhs);
}

MarketPriceOfRisk market_price_of_risk(const RegimeMarket& mkt) {
    MarketPriceOfRisk out;
    out.theta_.reserve(mkt.regimes());
    for (std::size_t i = 0; i < mkt.regimes(); ++i) {
        const auto& c = mkt.regime(i);
        const Eigen::VectorXd excess =
            c.expected_return - c.rate * Eigen::VectorXd::Ones(c.expected_return.size());
        out.theta_.push_back(solve_volatility(c.volatility, excess, false));
    }
    return out;
}

Eigen::MatrixXd gram_matrix(const RegimeMarket& mkt, std::size_t i) {
    if (i >= mkt.regimes()) {
        throw Error(ErrorCode::OutOfRange, "regime index " + std::to_string(i));
    }
    const auto& s = mkt.regime(i).volatility;
    Eigen::MatrixXd g = s * s.transpose();
    return 0.5 * (g + g.transpose());
}

}  // namespace rsport
