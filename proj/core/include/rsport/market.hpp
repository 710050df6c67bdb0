#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace rsport {

/// Generator of the regime chain: a validated S×S rate matrix with
/// nonnegative off-diagonals, zero row sums and a single communicating class.
///
/// Regimes are indexed 0..S-1 throughout the library; the CLI and file
/// formats use 1-based labels.
class Generator {
public:
    /// Validates `q` and takes ownership of it.
    ///
    /// Throws Error with NotSquare, NonFiniteInput, NonZeroRowSum
    /// (|row sum| > 1e-12·max|q|), NegativeOffDiagonal or Reducible.
    static Generator validate(Eigen::MatrixXd q);

    std::size_t regimes() const noexcept { return static_cast<std::size_t>(q_.rows()); }
    const Eigen::MatrixXd& rates() const noexcept { return q_; }
    double rate(std::size_t i, std::size_t j) const { return q_(i, j); }

    /// Exit rate λ_i = -q_ii.
    double exit_rate(std::size_t i) const { return -q_(i, i); }

    /// Unique probability vector p with pᵀQ = 0.
    Eigen::VectorXd stationary_distribution() const;

private:
    explicit Generator(Eigen::MatrixXd q) : q_(std::move(q)) {}
    Eigen::MatrixXd q_;
};

/// Coefficients of the market in one regime. Held constant in time.
struct RegimeCoefficients {
    double rate = 0.0;               ///< risk-free rate r_i
    Eigen::VectorXd expected_return; ///< α_i, m-vector
    Eigen::MatrixXd volatility;      ///< σ_i, m×m Brownian loadings
    Eigen::MatrixXd uncertain_vol;   ///< η_i, m×n canonical-process loadings
};

/// Regime-switching market: a generator plus per-regime coefficients over a
/// horizon [0, T]. Immutable once constructed.
class RegimeMarket {
public:
    /// Throws Error with DimensionMismatch, NonFiniteInput,
    /// NotPositiveDefinite (σ_i σ_iᵀ fails a Cholesky factorization) or
    /// InvalidArgument (T not positive and finite).
    RegimeMarket(Generator generator, std::vector<RegimeCoefficients> regimes, double horizon);

    const Generator& generator() const noexcept { return generator_; }
    std::size_t regimes() const noexcept { return regimes_.size(); }
    std::size_t assets() const noexcept { return assets_; }
    std::size_t canonical_dims() const noexcept { return canonical_dims_; }
    double horizon() const noexcept { return horizon_; }

    const RegimeCoefficients& regime(std::size_t i) const { return regimes_.at(i); }
    double exit_rate(std::size_t i) const { return generator_.exit_rate(i); }

    // Time-varying coefficients would enter here as r_i(t), α_i(t), ...;
    // every accessor currently ignores t.

private:
    Generator generator_;
    std::vector<RegimeCoefficients> regimes_;
    std::size_t assets_ = 0;
    std::size_t canonical_dims_ = 0;
    double horizon_ = 0.0;
};

/// Per-regime market price of risk θ_i solving σ_i θ_i = α_i - r_i·1.
class MarketPriceOfRisk {
public:
    const Eigen::VectorXd& operator[](std::size_t i) const { return theta_.at(i); }
    std::size_t regimes() const noexcept { return theta_.size(); }

    /// |θ_i|².
    double squared_norm(std::size_t i) const { return theta_.at(i).squaredNorm(); }

private:
    friend MarketPriceOfRisk market_price_of_risk(const RegimeMarket&);
    std::vector<Eigen::VectorXd> theta_;
};

/// Linear solve per regime; throws SingularVolatility when σ_i is
/// numerically singular.
MarketPriceOfRisk market_price_of_risk(const RegimeMarket& mkt);

/// Λ_i = σ_i σ_iᵀ, symmetrized. Throws OutOfRange on a bad index.
Eigen::MatrixXd gram_matrix(const RegimeMarket& mkt, std::size_t i);

/// Solves σ_i x = b, or σ_iᵀ x = b when `transposed`. Shared by the θ and π̂
/// computations so both detect singular σ_i the same way.
Eigen::VectorXd solve_volatility(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& rhs,
                                 bool transposed);

}  // namespace rsport
