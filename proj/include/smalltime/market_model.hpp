#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace smalltime {

/// Value of a coefficient function together with its first two y-derivatives.
struct FieldValue {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Smooth bounded coefficient function of the stochastic factor y.
///
/// Two families are supported, both bounded with bounded derivatives of every
/// order:
///   constant(c)                          f(y) = c
///   tanh_bounded(base, amp, center, sc)  f(y) = base + amp * tanh((y - center) / sc)
class ScalarField {
public:
    enum class Kind { Constant, TanhBounded };

    ScalarField() = default;

    static ScalarField constant(double c);
    static ScalarField tanh_bounded(double base, double amplitude, double center, double scale);

    [[nodiscard]] FieldValue eval(double y) const;
    [[nodiscard]] double operator()(double y) const { return eval(y).value; }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    /// Parameters in declaration order: {c} or {base, amplitude, center, scale}.
    [[nodiscard]] std::vector<double> params() const;

    /// Infimum of the field over the real line (attained or approached as |y| -> inf).
    [[nodiscard]] double lower_bound() const;

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    Kind kind_ = Kind::Constant;
    double base_ = 0.0;
    double amplitude_ = 0.0;
    double center_ = 0.0;
    double scale_ = 1.0;
};

/// Per-asset Sharpe ratio evaluation.
struct SharpeTriple {
    double lambda = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// n-asset stochastic factor market. Immutable once validated.
struct MarketModel {
    std::vector<ScalarField> sigma;   // volatilities sigma_i(y)
    std::vector<ScalarField> lambda;  // Sharpe ratios lambda_i(y)
    ScalarField a = ScalarField::constant(1.0);  // factor volatility
    ScalarField b = ScalarField::constant(0.0);  // factor drift
    Eigen::VectorXd omega;            // factor loadings
    Eigen::MatrixXd rho;              // asset noise correlations
    double rate = 0.0;

    [[nodiscard]] std::size_t n() const noexcept { return sigma.size(); }

    /// Excess-drift recovery mu_i(y) = R + sigma_i(y) * lambda_i(y).
    [[nodiscard]] Eigen::VectorXd drift(double y) const;
    [[nodiscard]] Eigen::VectorXd sigma_at(double y) const;
    [[nodiscard]] Eigen::VectorXd lambda_at(double y) const;

    /// 1 - sum omega_i^2, the weight on the idiosyncratic factor noise squared.
    [[nodiscard]] double idiosyncratic_weight() const;

    friend bool operator==(const MarketModel&, const MarketModel&);
};

std::vector<SharpeTriple> sharpe_vector(const MarketModel& model, double y);

struct DominanceReport {
    bool ok = true;
    double worst_margin = 0.0;  // min over grid and assets of 2 sigma_i - sum_{j != i} rho_ij sigma_j
    double worst_y = 0.0;
    std::size_t worst_asset = 0;
};

/// Checks sum_{j != i} rho_ij sigma_j(y) < 2 sigma_i(y) for every asset on every grid point.
DominanceReport check_diagonal_dominance(const MarketModel& model, const std::vector<double>& y_grid);

/// Default probe grid: 1001 equally spaced points on [-50, 50].
std::vector<double> default_probe_grid();

struct ValidationIssue {
    std::string assumption;  // which model assumption is broken
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    /// a^2 (omega' rho omega + 1 - sum omega^2) / a^2: variance multiplier of the factor noise.
    double factor_variance_multiplier = 1.0;
    double min_rho_eigenvalue = 0.0;

    [[nodiscard]] bool ok() const noexcept { return issues.empty(); }
    [[nodiscard]] std::string summary() const;
};

ValidationReport validate_model(const MarketModel& model,
                                const std::vector<double>& probe_grid = default_probe_grid());

/// Throws ModelError with the report summary unless the model validates.
void require_valid(const MarketModel& model,
                   const std::vector<double>& probe_grid = default_probe_grid());

}  // namespace smalltime
