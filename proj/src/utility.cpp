#include "smalltime/utility.hpp"

#include "smalltime/errors.hpp"

#include <cmath>
#include <string>

namespace smalltime {

namespace {

// d^k/ds^k of c/(1-p) s^(1-p) for k = 0..5.
void add_power_terms(std::array<double, 6>& out, double c, double p, double s) {
    if (c == 0.0) return;
    double coef = c / (1.0 - p);
    double exponent = 1.0 - p;
    for (int k = 0; k <= Utility::max_order; ++k) {
        out[k] += coef * std::pow(s, exponent);
        coef *= exponent;
        exponent -= 1.0;
    }
}

}  // namespace

Utility Utility::log() { return Utility{}; }

Utility Utility::power(double c1, double alpha, double c2, double beta) {
    if (beta < 0.0) beta = alpha;
    if (!(alpha > 0.0) || !(beta > 0.0)) throw ModelError("utility: alpha and beta must be > 0");
    if (alpha == 1.0 || beta == 1.0) throw ModelError("utility: alpha and beta must differ from 1");
    if (c1 < 0.0 || c2 < 0.0) throw ModelError("utility: c1 and c2 must be >= 0");
    if (!(c1 > 0.0 || c2 > 0.0)) throw ModelError("utility: need c1 > 0 or c2 > 0");
    Utility u;
    u.kind_ = Kind::PowerMixture;
    u.c1_ = c1;
    u.alpha_ = alpha;
    u.c2_ = c2;
    // An absent second power takes the first exponent so f keeps two equal terms.
    u.beta_ = (c2 == 0.0) ? alpha : beta;
    return u;
}

std::array<double, 6> Utility::all_derivs(double s) const {
    if (!(s > 0.0)) throw DomainError("utility: wealth must be > 0, got " + std::to_string(s));
    std::array<double, 6> d{};
    if (kind_ == Kind::Log) {
        const double inv = 1.0 / s;
        d[0] = std::log(s);
        d[1] = inv;
        d[2] = -inv * inv;
        d[3] = 2.0 * inv * inv * inv;
        d[4] = -6.0 * inv * inv * inv * inv;
        d[5] = 24.0 * inv * inv * inv * inv * inv;
        return d;
    }
    add_power_terms(d, c1_, alpha_, s);
    add_power_terms(d, c2_, beta_, s);
    return d;
}

std::vector<double> Utility::derivs(double s, int order) const {
    if (order < 0 || order > max_order) throw DomainError("utility: derivative order must be in [0, 5]");
    const auto all = all_derivs(s);
    return {all.begin(), all.begin() + order + 1};
}

double Utility::value(double s) const { return all_derivs(s)[0]; }

double Utility::f_order(double s) const {
    if (!(s > 0.0)) throw DomainError("f_order: wealth must be > 0");
    if (kind_ == Kind::Log) return 1.0;
    return std::pow(s, 1.0 - alpha_) + std::pow(s, 1.0 - beta_);
}

double Utility::g_bound(double s) const {
    if (!(s > 0.0)) throw DomainError("g_bound: wealth must be > 0");
    if (kind_ == Kind::Log) return std::log(s) + 1.0;
    return f_order(s);
}

std::vector<double> u_derivs(const Utility& u, double s, int order) { return u.derivs(s, order); }

WealthPoint::WealthPoint(Eigen::VectorXd x) : x_(std::move(x)), s_(0.0) {
    if (x_.size() == 0) throw DomainError("wealth point needs at least one component");
    for (Eigen::Index i = 0; i < x_.size(); ++i) {
        if (!(x_[i] > 0.0)) throw DomainError("wealth components must be strictly positive");
    }
    s_ = x_.sum();
}

WealthPoint WealthPoint::split_evenly(double s, std::size_t n) {
    if (!(s > 0.0) || n == 0) throw DomainError("split_evenly: need s > 0 and n >= 1");
    return WealthPoint(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), s / static_cast<double>(n)));
}

}  // namespace smalltime
