#pragma once

#include "smalltime/expansion.hpp"
#include "smalltime/market_model.hpp"
#include "smalltime/utility.hpp"

#include <Eigen/Dense>

#include <vector>

namespace smalltime {

/// First-order-condition system  mat * pi = rhs  of the HJB maximization:
///   mat_ii = U_{x_i x_i},  mat_ij = sigma_j rho_ij U_{x_i x_j} / (2 sigma_i),
///   rhs_i  = (-lambda_i U_{x_i} - a omega_i U_{x_i y}) / sigma_i.
struct HjbLinearSystem {
    Eigen::MatrixXd mat;
    Eigen::VectorXd rhs;

    [[nodiscard]] bool strictly_diagonally_dominant() const;
};

HjbLinearSystem assemble_system(const PartialBundle& p, const MarketModel& model, double y);

struct JacobiResult {
    Eigen::VectorXd solution;
    int iterations = 0;
    double residual = 0.0;  // ||mat x - rhs||_inf
};

/// Jacobi iteration from x0 = 0 until the max-norm update drops below tol.
/// Refuses systems that are not strictly diagonally dominant.
JacobiResult jacobi_solve(const HjbLinearSystem& sys, double tol = 1e-12, int max_iter = 10000);

/// Truncated Neumann series (I + T) D^-1 rhs, T = -D^-1 (mat - D).
Eigen::VectorXd neumann_first_order(const HjbLinearSystem& sys);

/// Closed-form first-order portfolio built directly from the partials.
Eigen::VectorXd pi_hat(const PartialBundle& p, const MarketModel& model, double y);

/// pi_hat at the horizon: (1/(2 sigma_i)) (-3 lambda_i + rho_i . lambda) U'/U''.
Eigen::VectorXd pi_zero(const MarketModel& model, const Utility& u, const WealthPoint& x, double y);

/// pi_hat applied to the first-order approximation at time t.
Eigen::VectorXd tilde_pi(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x,
                         double y);

/// The HJB generator evaluated for a given policy:
///   sum sigma_i pi_i lambda_i U_{x_i} + 1/2 sum rho_ij sigma_i sigma_j pi_i pi_j U_{x_i x_j}
///   + a sum sigma_i pi_i omega_i U_{x_i y} + b U_y + 1/2 a^2 U_yy
double hjb_operator(const PartialBundle& p, const Eigen::VectorXd& policy, const MarketModel& model, double y);

/// Residual U_t + H(U) of the first-order approximation (with_u2 = false) or of
/// the second-order approximation u_hat + (T-t)^2 U^(2) (with_u2 = true), with
/// the policy pi_hat of that same approximation. Partials of U^(2) are taken by
/// central differences in s and y.
double hjb_residual(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x,
                    double y, bool with_u2);

/// Tabulated value function on an (s, y) grid at one time level.
struct SchemeGrid {
    std::vector<double> s_axis;
    std::vector<double> y_axis;
    std::vector<double> values;  // row-major: values[i * y_axis.size() + j] = V(s_i, y_j)
    double t_level = 0.0;

    [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * y_axis.size() + j]; }
};

/// Backward recursion V(t_k) = V(t_{k+1}) + (t_{k+1} - t_k) H(V(t_{k+1})) from V(T) = U_T.
/// Returns one grid per partition point, index k <-> t_k.
std::vector<SchemeGrid> scheme_run(const MarketModel& model, const Utility& u, const std::vector<double>& s_axis,
                                   const std::vector<double>& y_axis, const std::vector<double>& partition);

/// Finite-difference weights for derivatives 0..max_order at x0 from the given nodes.
/// weights[k][j] multiplies f(nodes[j]) in the k-th derivative.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& nodes, int max_order);

}  // namespace smalltime
