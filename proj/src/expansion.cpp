#include "smalltime/expansion.hpp"

#include "smalltime/errors.hpp"

#include <algorithm>
#include <cmath>

namespace smalltime {

namespace {

void require_horizon(double t, double T) {
    if (!(t <= T)) throw DomainError("time t must not exceed the horizon T");
}

void require_dims(const MarketModel& model, const WealthPoint& x) {
    if (x.n() != model.n()) throw DomainError("wealth point dimension does not match the model");
}

double checked_inverse(double v, const char* what) {
    if (v == 0.0 || !std::isfinite(v)) throw SingularityError(what);
    return 1.0 / v;
}

// a_i = rho_i . lambda - 3 lambda_i, applied to an arbitrary vector.
Eigen::VectorXd coupled(const Eigen::MatrixXd& rho, const Eigen::VectorXd& v) { return rho * v - 3.0 * v; }

}  // namespace

PartialBundle PartialBundle::radial(std::size_t n, const RadialPartials& r) {
    const auto m = static_cast<Eigen::Index>(n);
    PartialBundle p;
    p.value = r.v;
    p.d_x = Eigen::VectorXd::Constant(m, r.v_s);
    p.d_xx = Eigen::MatrixXd::Constant(m, m, r.v_ss);
    p.d_y = r.v_y;
    p.d_yy = r.v_yy;
    p.d_xy = Eigen::VectorXd::Constant(m, r.v_sy);
    return p;
}

bool PartialBundle::is_radial(double rel_tol) const {
    if (d_x.size() == 0) return true;
    auto close = [rel_tol](double a, double b) {
        return std::abs(a - b) <= rel_tol * std::max({1e-300, std::abs(a), std::abs(b)});
    };
    const double x0 = d_x[0];
    const double xx0 = d_xx(0, 0);
    for (Eigen::Index i = 0; i < d_x.size(); ++i) {
        if (!close(d_x[i], x0)) return false;
        for (Eigen::Index j = 0; j < d_x.size(); ++j) {
            if (!close(d_xx(i, j), xx0)) return false;
        }
    }
    return true;
}

PartialBundle terminal_bundle(const Utility& u, const WealthPoint& x) {
    const auto d = u.all_derivs(x.s());
    return PartialBundle::radial(x.n(), {d[0], d[1], d[2], 0.0, 0.0, 0.0});
}

SharpeCoefficient u1_coefficient(const MarketModel& model, double y) {
    const auto n = static_cast<Eigen::Index>(model.n());
    Eigen::VectorXd l(n), l1(n), l2(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto v = model.lambda[static_cast<std::size_t>(i)].eval(y);
        l[i] = v.value;
        l1[i] = v.d1;
        l2[i] = v.d2;
    }
    const Eigen::MatrixXd& rho = model.rho;
    const Eigen::VectorXd a = coupled(rho, l);
    const Eigen::VectorXd a1 = coupled(rho, l1);
    const Eigen::VectorXd a2 = coupled(rho, l2);

    // C = 1/2 sum_i lambda_i a_i + 1/8 a' rho a,  a_i = rho_i . lambda - 3 lambda_i
    SharpeCoefficient c;
    c.c = 0.5 * l.dot(a) + 0.125 * a.dot(rho * a);
    c.c_y = 0.5 * (l1.dot(a) + l.dot(a1)) + 0.125 * (a1.dot(rho * a) + a.dot(rho * a1));
    c.c_yy = 0.5 * (l2.dot(a) + 2.0 * l1.dot(a1) + l.dot(a2)) +
             0.125 * (a2.dot(rho * a) + 2.0 * a1.dot(rho * a1) + a.dot(rho * a2));
    return c;
}

RiskRatio risk_ratio(const Utility& u, double s) {
    const auto d = u.all_derivs(s);
    const double inv2 = checked_inverse(d[2], "U_T'' vanishes");
    RiskRatio r;
    r.q = d[1] * d[1] * inv2;
    r.q_s = 2.0 * d[1] - d[1] * d[1] * d[3] * inv2 * inv2;
    r.q_ss = 2.0 * d[2] - 2.0 * d[1] * d[3] * inv2 - d[1] * d[1] * d[4] * inv2 * inv2 +
             2.0 * d[1] * d[1] * d[3] * d[3] * inv2 * inv2 * inv2;
    return r;
}

double u1(const MarketModel& model, const Utility& u, const WealthPoint& x, double y) {
    require_dims(model, x);
    const PartialBundle p = terminal_bundle(u, x);
    const Eigen::VectorXd l = model.lambda_at(y);
    const Eigen::VectorXd a = coupled(model.rho, l);
    const auto n = static_cast<Eigen::Index>(model.n());

    double first = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double uii = p.d_xx(i, i);
        if (uii == 0.0) throw SingularityError("U_T'' vanishes");
        first += l[i] * a[i] * p.d_x[i] * p.d_x[i] / uii;
    }
    double second = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            second += model.rho(i, j) * a[i] * a[j] * p.d_x[i] * p.d_x[j] * p.d_xx(i, j) /
                      (p.d_xx(i, i) * p.d_xx(j, j));
        }
    }
    return 0.5 * first + 0.125 * second;
}

U1Partials u1_partials(const MarketModel& model, const Utility& u, const WealthPoint& x, double y) {
    require_dims(model, x);
    const auto c = u1_coefficient(model, y);
    const auto q = risk_ratio(u, x.s());
    const auto n = static_cast<Eigen::Index>(model.n());
    U1Partials out;
    out.u1_x = Eigen::VectorXd::Constant(n, c.c * q.q_s);
    out.u1_xx = Eigen::MatrixXd::Constant(n, n, c.c * q.q_ss);
    out.u1_y = c.c_y * q.q;
    out.u1_yy = c.c_yy * q.q;
    out.u1_xy = Eigen::VectorXd::Constant(n, c.c_y * q.q_s);
    return out;
}

Eigen::VectorXd g_vector(const MarketModel& model, const Utility& u, const WealthPoint& x, double y) {
    require_dims(model, x);
    const PartialBundle p = terminal_bundle(u, x);
    const Eigen::VectorXd l = model.lambda_at(y);
    const Eigen::VectorXd lu = l.cwiseProduct(p.d_x);
    return -3.0 * lu + model.rho * lu;
}

ExpansionTerms expansion_terms(const MarketModel& model, const Utility& u, const WealthPoint& x, double y) {
    require_dims(model, x);
    const auto n = static_cast<Eigen::Index>(model.n());
    const double nd = static_cast<double>(n);
    const PartialBundle p0 = terminal_bundle(u, x);
    const U1Partials p1 = u1_partials(model, u, x, y);
    const Eigen::VectorXd l = model.lambda_at(y);
    const Eigen::VectorXd w = model.omega;
    const Eigen::MatrixXd& rho = model.rho;
    const double av = model.a(y);
    const double bv = model.b(y);

    ExpansionTerms e;
    e.u1 = u1(model, u, x, y);
    e.u1_x = p1.u1_x;
    e.u1_xx = p1.u1_xx;
    e.u1_y = p1.u1_y;
    e.u1_yy = p1.u1_yy;
    e.u1_xy = p1.u1_xy;

    // r_l = U1_{x_l x_l} / U0_{x_l x_l}, B = sum_l r_l
    Eigen::VectorXd r(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        r[k] = p1.u1_xx(k, k) * checked_inverse(p0.d_xx(k, k), "U0_{x_l x_l} vanishes");
    }
    const double B = r.sum();

    e.G = g_vector(model, u, x, y);
    e.H.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double h = -3.0 * (l[i] * p1.u1_x[i] + av * w[i] * p1.u1_xy[i] + l[i] * p0.d_x[i] * B);
        for (Eigen::Index k = 0; k < n; ++k) {
            h += rho(i, k) * (l[k] * p1.u1_x[k] + av * w[k] * p1.u1_xy[k]);
            h += rho(i, k) * l[k] * p0.d_x[k] * p1.u1_xx(i, k) / p0.d_xx(k, k);
            h += rho(i, k) * l[k] * p0.d_x[k] * (B - r[k]);
        }
        e.H[i] = h;
    }

    const Eigen::VectorXd& G = e.G;
    const Eigen::VectorXd& H = e.H;
    U2Terms t{};
    t[0] = -0.5 * (nd + 1.0) * e.u1 * B;
    t[1] = 0.5 * bv * p1.u1_y;
    t[2] = 0.25 * av * av * p1.u1_yy;
    for (Eigen::Index i = 0; i < n; ++i) {
        t[3] += 0.25 * av * G[i] * w[i] * p1.u1_xy[i] / p0.d_xx(i, i);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double bracket = H[i] * p0.d_x[i] + G[i] * p1.u1_x[i] +
                               G[i] * p0.d_x[i] * ((nd - 1.0) * B + (B - r[i]));
        t[4] += 0.25 * l[i] / p0.d_xx(i, i) * bracket;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            // sum over l != i, j (just l != i on the diagonal)
            const double others = (i == j) ? B - r[i] : B - r[i] - r[j];
            const double bracket =
                (G[i] * H[j] + H[i] * G[j]) * p0.d_xx(i, j) +
                G[i] * G[j] * (p1.u1_xx(i, j) + p0.d_xx(i, j) * ((nd - 2.0) * B + others));
            t[5] += rho(i, j) / (16.0 * p0.d_xx(i, i) * p0.d_xx(j, j)) * bracket;
        }
    }
    e.u2_terms = t;
    e.u2 = t[0] + t[1] + t[2] + t[3] + t[4] + t[5];
    return e;
}

double u2(const MarketModel& model, const Utility& u, const WealthPoint& x, double y) {
    return expansion_terms(model, u, x, y).u2;
}

double u_hat(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x, double y) {
    require_horizon(t, T);
    if (t == T) return u.value(x.s());
    return u.value(x.s()) + (T - t) * u1(model, u, x, y);
}

PartialBundle u_hat_bundle(const MarketModel& model, const Utility& u, double t, double T,
                           const WealthPoint& x, double y) {
    require_horizon(t, T);
    require_dims(model, x);
    const double delta = T - t;
    const auto d = u.all_derivs(x.s());
    const auto c = u1_coefficient(model, y);
    const auto q = risk_ratio(u, x.s());
    RadialPartials r;
    r.v = d[0] + delta * c.c * q.q;
    r.v_s = d[1] + delta * c.c * q.q_s;
    r.v_ss = d[2] + delta * c.c * q.q_ss;
    r.v_y = delta * c.c_y * q.q;
    r.v_yy = delta * c.c_yy * q.q;
    r.v_sy = delta * c.c_y * q.q_s;
    return PartialBundle::radial(x.n(), r);
}

double single_asset_reduction(double lambda, const Utility& u, double t, double T, double s) {
    require_horizon(t, T);
    const auto d = u.all_derivs(s);
    const double inv2 = checked_inverse(d[2], "U_T'' vanishes");
    return d[0] - (T - t) * lambda * lambda * d[1] * d[1] * inv2 / 2.0;
}

Envelope super_sub(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x,
                   double y, double u2_cap) {
    if (!(u2_cap > 0.0)) throw DomainError("super_sub: u2_cap must be > 0");
    const double center = u_hat(model, u, t, T, x, y);
    const double delta = T - t;
    const double width = delta * delta * u2_cap * u.f_order(x.s());
    return {center + width, center - width};
}

double u2_bound_scan(const MarketModel& model, const Utility& u, const std::vector<double>& s_values,
                     const std::vector<double>& y_values) {
    if (s_values.empty() || y_values.empty()) throw DomainError("u2_bound_scan: empty scan box");
    double worst = 0.0;
    for (double s : s_values) {
        const WealthPoint x = WealthPoint::split_evenly(s, model.n());
        const double f = u.f_order(s);
        for (double y : y_values) {
            const auto e = expansion_terms(model, u, x, y);
            for (double term : e.u2_terms) worst = std::max(worst, std::abs(term) / f);
        }
    }
    return 1.0 + static_cast<double>(u2_term_count) * worst;
}

std::vector<double> default_u2_scan_wealth() {
    std::vector<double> s(41);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = std::pow(10.0, -2.0 + 0.15 * static_cast<double>(k));
    return s;
}

}  // namespace smalltime
