#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace smalltime {

/// Terminal utility U_T as a function of total wealth s = sum x_i.
///
/// Log:           U(s) = ln s
/// PowerMixture:  U(s) = c1/(1-alpha) s^(1-alpha) + c2/(1-beta) s^(1-beta)
///
/// A mixture with c2 == 0 uses beta := alpha in the order function f, so
/// f(s) = 2 s^(1-alpha) in that case.
class Utility {
public:
    enum class Kind { Log, PowerMixture };

    static constexpr int max_order = 5;

    static Utility log();
    static Utility power(double c1, double alpha, double c2 = 0.0, double beta = -1.0);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double c1() const noexcept { return c1_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double c2() const noexcept { return c2_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }

    /// [U(s), U'(s), ..., U^(order)(s)]; order in [0, 5].
    [[nodiscard]] std::vector<double> derivs(double s, int order) const;
    /// Fixed-size variant returning all orders 0..5.
    [[nodiscard]] std::array<double, 6> all_derivs(double s) const;
    [[nodiscard]] double value(double s) const;

    /// Asymptotic order function f: 1 (log) or s^(1-alpha) + s^(1-beta).
    [[nodiscard]] double f_order(double s) const;
    /// Integrability bound g: ln s + 1 (log) or f(s).
    [[nodiscard]] double g_bound(double s) const;

    friend bool operator==(const Utility&, const Utility&) = default;

private:
    Kind kind_ = Kind::Log;
    double c1_ = 0.0;
    double alpha_ = 0.0;
    double c2_ = 0.0;
    double beta_ = 0.0;
};

/// Free-function spelling of Utility::derivs.
std::vector<double> u_derivs(const Utility& u, double s, int order);

/// Strictly positive wealth vector with its total s = sum x_i cached.
class WealthPoint {
public:
    explicit WealthPoint(Eigen::VectorXd x);
    /// n equal components summing to s.
    static WealthPoint split_evenly(double s, std::size_t n);

    [[nodiscard]] const Eigen::VectorXd& x() const noexcept { return x_; }
    [[nodiscard]] double s() const noexcept { return s_; }
    [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(x_.size()); }

private:
    Eigen::VectorXd x_;
    double s_;
};

}  // namespace smalltime
