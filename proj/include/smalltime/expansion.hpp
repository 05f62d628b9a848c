#pragma once

#include "smalltime/market_model.hpp"
#include "smalltime/utility.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace smalltime {

/// Partials of a radial candidate value function V(s, y), s = sum x_i.
struct RadialPartials {
    double v = 0.0;
    double v_s = 0.0;
    double v_ss = 0.0;
    double v_y = 0.0;
    double v_yy = 0.0;
    double v_sy = 0.0;
};

/// Every partial derivative of a candidate value function at (t, x, y) that
/// the HJB operator and the portfolio formula consume.
struct PartialBundle {
    double value = 0.0;
    Eigen::VectorXd d_x;   // U_{x_i}
    Eigen::MatrixXd d_xx;  // U_{x_i x_j}
    double d_y = 0.0;
    double d_yy = 0.0;
    Eigen::VectorXd d_xy;  // U_{x_i y}

    /// Expand partials of a function of s = sum x_i: every x-partial equals the s-partial.
    static PartialBundle radial(std::size_t n, const RadialPartials& r);

    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(d_x.size()); }
    /// True when all first x-partials coincide and all second x-partials coincide.
    [[nodiscard]] bool is_radial(double rel_tol = 1e-12) const;
};

/// Bundle of U_T at x (no y dependence).
PartialBundle terminal_bundle(const Utility& u, const WealthPoint& x);

/// U^(1)(x, y) = C(y) * U_T'(s)^2 / U_T''(s); C and its y-derivatives.
struct SharpeCoefficient {
    double c = 0.0;
    double c_y = 0.0;
    double c_yy = 0.0;
};
SharpeCoefficient u1_coefficient(const MarketModel& model, double y);

/// Q(s) = U'^2/U'' and its first two s-derivatives.
struct RiskRatio {
    double q = 0.0;
    double q_s = 0.0;
    double q_ss = 0.0;
};
RiskRatio risk_ratio(const Utility& u, double s);

/// First-order correction U^(1)(x, y), evaluated term by term from the
/// correlation-weighted Sharpe sums and the partials of U_T.
double u1(const MarketModel& model, const Utility& u, const WealthPoint& x, double y);

struct U1Partials {
    Eigen::VectorXd u1_x;
    Eigen::MatrixXd u1_xx;
    double u1_y = 0.0;
    double u1_yy = 0.0;
    Eigen::VectorXd u1_xy;
};
U1Partials u1_partials(const MarketModel& model, const Utility& u, const WealthPoint& x, double y);

/// The additive terms of U^(2): the factor-coupling term -(n+1)/2 U1 B, the
/// two factor-drift/diffusion terms, the loading sum, the single and the
/// double summation block. Their sum is U^(2).
inline constexpr std::size_t u2_term_count = 6;
using U2Terms = std::array<double, u2_term_count>;

struct ExpansionTerms {
    double u1 = 0.0;
    Eigen::VectorXd u1_x;
    Eigen::MatrixXd u1_xx;
    double u1_y = 0.0;
    double u1_yy = 0.0;
    Eigen::VectorXd u1_xy;
    double u2 = 0.0;
    U2Terms u2_terms{};
    Eigen::VectorXd G;
    Eigen::VectorXd H;
};
ExpansionTerms expansion_terms(const MarketModel& model, const Utility& u, const WealthPoint& x, double y);

double u2(const MarketModel& model, const Utility& u, const WealthPoint& x, double y);

/// G_i = -3 lambda_i U_{x_i} + sum_k rho_ik lambda_k U_{x_k} for the terminal utility.
Eigen::VectorXd g_vector(const MarketModel& model, const Utility& u, const WealthPoint& x, double y);

/// First-order approximation U_T(x) + (T - t) U^(1)(x, y).
double u_hat(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x, double y);

/// Partials of u_hat at (t, x, y).
PartialBundle u_hat_bundle(const MarketModel& model, const Utility& u, double t, double T,
                           const WealthPoint& x, double y);

/// Single-asset form U_T(s) - (T - t) lambda^2 U'(s)^2 / (2 U''(s)).
double single_asset_reduction(double lambda, const Utility& u, double t, double T, double s);

struct Envelope {
    double upper = 0.0;
    double lower = 0.0;
};
/// u_hat +/- (T - t)^2 * u2_cap * f(x).
Envelope super_sub(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x,
                   double y, double u2_cap);

/// 1 + m * max over the box of |term_k| / f(s). Wealth is split evenly over assets.
double u2_bound_scan(const MarketModel& model, const Utility& u, const std::vector<double>& s_values,
                     const std::vector<double>& y_values);

/// Default scan: 41 log-spaced wealth levels on [1e-2, 1e4].
std::vector<double> default_u2_scan_wealth();

}  // namespace smalltime
