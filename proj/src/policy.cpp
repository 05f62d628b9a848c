#include "smalltime/policy.hpp"

#include "smalltime/errors.hpp"
#include "smalltime/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smalltime {

bool HjbLinearSystem::strictly_diagonally_dominant() const {
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            if (j != i) off += std::abs(mat(i, j));
        }
        if (!(std::abs(mat(i, i)) > off)) return false;
    }
    return true;
}

HjbLinearSystem assemble_system(const PartialBundle& p, const MarketModel& model, double y) {
    const auto n = static_cast<Eigen::Index>(model.n());
    if (static_cast<Eigen::Index>(p.n()) != n) throw DomainError("bundle dimension does not match the model");
    const Eigen::VectorXd sig = model.sigma_at(y);
    const Eigen::VectorXd lam = model.lambda_at(y);
    const double av = model.a(y);

    HjbLinearSystem sys;
    sys.mat.resize(n, n);
    sys.rhs.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (p.d_xx(i, i) == 0.0) throw SingularityError("assemble_system: zero diagonal U_{x_i x_i}");
        for (Eigen::Index j = 0; j < n; ++j) {
            sys.mat(i, j) = (i == j) ? p.d_xx(i, i) : sig[j] * model.rho(i, j) * p.d_xx(i, j) / (2.0 * sig[i]);
        }
        sys.rhs[i] = (-lam[i] * p.d_x[i] - av * model.omega[i] * p.d_xy[i]) / sig[i];
    }
    return sys;
}

JacobiResult jacobi_solve(const HjbLinearSystem& sys, double tol, int max_iter) {
    const Eigen::Index n = sys.mat.rows();
    if (n == 0 || sys.mat.cols() != n || sys.rhs.size() != n) throw DomainError("jacobi_solve: malformed system");
    if (!sys.strictly_diagonally_dominant()) {
        throw ConvergenceError("jacobi_solve: matrix is not strictly diagonally dominant", NAN);
    }
    const Eigen::VectorXd diag = sys.mat.diagonal();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd next(n);
    JacobiResult res;
    for (int k = 1; k <= max_iter; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double acc = sys.rhs[i];
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j != i) acc -= sys.mat(i, j) * x[j];
            }
            next[i] = acc / diag[i];
        }
        const double update = (next - x).lpNorm<Eigen::Infinity>();
        x.swap(next);
        if (update < tol) {
            res.solution = x;
            res.iterations = k;
            res.residual = (sys.mat * x - sys.rhs).lpNorm<Eigen::Infinity>();
            return res;
        }
    }
    const double last = (sys.mat * x - sys.rhs).lpNorm<Eigen::Infinity>();
    throw ConvergenceError("jacobi_solve: no convergence within " + std::to_string(max_iter) + " iterations",
                           last);
}

Eigen::VectorXd neumann_first_order(const HjbLinearSystem& sys) {
    const Eigen::Index n = sys.mat.rows();
    Eigen::VectorXd dv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sys.mat(i, i) == 0.0) throw SingularityError("neumann_first_order: zero diagonal");
        dv[i] = sys.rhs[i] / sys.mat(i, i);
    }
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k != i) acc += sys.mat(i, k) * dv[k];
        }
        out[i] = dv[i] - acc / sys.mat(i, i);
    }
    return out;
}

Eigen::VectorXd pi_hat(const PartialBundle& p, const MarketModel& model, double y) {
    const auto n = static_cast<Eigen::Index>(model.n());
    if (static_cast<Eigen::Index>(p.n()) != n) throw DomainError("bundle dimension does not match the model");
    const Eigen::VectorXd sig = model.sigma_at(y);
    const Eigen::VectorXd lam = model.lambda_at(y);
    const double av = model.a(y);

    // m_k = lambda_k U_{x_k} + a omega_k U_{x_k y}
    Eigen::VectorXd m(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (p.d_xx(k, k) == 0.0) throw SingularityError("pi_hat: zero U_{x_k x_k}");
        m[k] = lam[k] * p.d_x[k] + av * model.omega[k] * p.d_xy[k];
    }
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = -3.0 * m[i];
        for (Eigen::Index k = 0; k < n; ++k) acc += model.rho(i, k) * m[k] * p.d_xx(i, k) / p.d_xx(k, k);
        out[i] = acc / (2.0 * sig[i] * p.d_xx(i, i));
    }
    return out;
}

Eigen::VectorXd pi_zero(const MarketModel& model, const Utility& u, const WealthPoint& x, double y) {
    if (x.n() != model.n()) throw DomainError("wealth point dimension does not match the model");
    const auto d = u.all_derivs(x.s());
    if (d[2] == 0.0) throw SingularityError("pi_zero: U_T'' vanishes");
    const Eigen::VectorXd sig = model.sigma_at(y);
    const Eigen::VectorXd lam = model.lambda_at(y);
    const Eigen::VectorXd coupled = model.rho * lam - 3.0 * lam;
    return (coupled.array() / (2.0 * sig.array())).matrix() * (d[1] / d[2]);
}

Eigen::VectorXd tilde_pi(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x,
                         double y) {
    return pi_hat(u_hat_bundle(model, u, t, T, x, y), model, y);
}

double hjb_operator(const PartialBundle& p, const Eigen::VectorXd& policy, const MarketModel& model, double y) {
    const auto n = static_cast<Eigen::Index>(model.n());
    if (static_cast<Eigen::Index>(p.n()) != n || policy.size() != n) {
        throw DomainError("hjb_operator: dimension mismatch");
    }
    const Eigen::VectorXd sig = model.sigma_at(y);
    const Eigen::VectorXd lam = model.lambda_at(y);
    const double av = model.a(y);
    const double bv = model.b(y);
    const Eigen::VectorXd sp = sig.cwiseProduct(policy);

    double drift = 0.0;
    double cross = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        drift += sp[i] * lam[i] * p.d_x[i];
        cross += sp[i] * model.omega[i] * p.d_xy[i];
    }
    double quad = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) quad += model.rho(i, j) * sp[i] * sp[j] * p.d_xx(i, j);
    }
    return drift + 0.5 * quad + av * cross + bv * p.d_y + 0.5 * av * av * p.d_yy;
}

namespace {

// Five-point central differences of U^(2) in s and y (mixed term by a 4x4 product stencil).
RadialPartials u2_radial_partials(const MarketModel& model, const Utility& u, double s, double y) {
    const std::size_t n = model.n();
    auto f = [&](double ss, double yy) { return u2(model, u, WealthPoint::split_evenly(ss, n), yy); };
    const double hs = 1e-3 * s;
    const double hy = 1e-3 * std::max(1.0, std::abs(y));
    const double c1[] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};
    const double c2[] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
    double fs[5], fy[5];
    for (int k = 0; k < 5; ++k) {
        fs[k] = f(s + (k - 2) * hs, y);
        fy[k] = f(s, y + (k - 2) * hy);
    }
    RadialPartials r;
    r.v = fs[2];
    for (int k = 0; k < 5; ++k) {
        r.v_s += c1[k] * fs[k] / hs;
        r.v_ss += c2[k] * fs[k] / (hs * hs);
        r.v_y += c1[k] * fy[k] / hy;
        r.v_yy += c2[k] * fy[k] / (hy * hy);
    }
    for (int a = 0; a < 5; ++a) {
        if (a == 2) continue;
        for (int b = 0; b < 5; ++b) {
            if (b == 2) continue;
            r.v_sy += c1[a] * c1[b] * f(s + (a - 2) * hs, y + (b - 2) * hy) / (hs * hy);
        }
    }
    return r;
}

}  // namespace

double hjb_residual(const MarketModel& model, const Utility& u, double t, double T, const WealthPoint& x,
                    double y, bool with_u2) {
    const double delta = T - t;
    PartialBundle p = u_hat_bundle(model, u, t, T, x, y);
    double v_t = -u1(model, u, x, y);
    if (with_u2) {
        const RadialPartials r = u2_radial_partials(model, u, x.s(), y);
        const double w = delta * delta;
        p.value += w * r.v;
        p.d_x.array() += w * r.v_s;
        p.d_xx.array() += w * r.v_ss;
        p.d_y += w * r.v_y;
        p.d_yy += w * r.v_yy;
        p.d_xy.array() += w * r.v_sy;
        v_t -= 2.0 * delta * r.v;
    }
    return v_t + hjb_operator(p, pi_hat(p, model, y), model, y);
}

std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& nodes, int max_order) {
    // Fornberg's recursion for arbitrarily spaced nodes.
    const std::size_t np = nodes.size();
    const auto M = static_cast<std::size_t>(max_order);
    std::vector<std::vector<double>> c(M + 1, std::vector<double>(np, 0.0));
    if (np == 0) return c;
    double c1 = 1.0;
    double c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < np; ++i) {
        const std::size_t mn = std::min(i, M);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

namespace {

// Per-node stencils for first and second derivatives along one axis:
// 3 centred nodes in the interior, 4 one-sided nodes at each end.
struct AxisStencil {
    std::size_t first = 0;  // index of the first node used
    std::vector<double> d1;
    std::vector<double> d2;
};

std::vector<AxisStencil> build_stencils(const std::vector<double>& axis) {
    const std::size_t m = axis.size();
    std::vector<AxisStencil> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t lo = 0;
        std::size_t width = 3;
        if (i == 0) {
            lo = 0;
            width = 4;
        } else if (i == m - 1) {
            lo = m - 4;
            width = 4;
        } else {
            lo = i - 1;
        }
        std::vector<double> nodes(axis.begin() + static_cast<std::ptrdiff_t>(lo),
                                  axis.begin() + static_cast<std::ptrdiff_t>(lo + width));
        const auto w = fd_weights(axis[i], nodes, 2);
        out[i] = {lo, w[1], w[2]};
    }
    return out;
}

void require_axis(const std::vector<double>& axis, const char* name, bool positive) {
    if (axis.size() < 5) throw StencilError(std::string(name) + " axis needs at least 5 points");
    for (std::size_t i = 0; i < axis.size(); ++i) {
        if (!std::isfinite(axis[i])) throw StencilError(std::string(name) + " axis has non-finite entries");
        if (i > 0 && !(axis[i] > axis[i - 1])) {
            throw StencilError(std::string(name) + " axis must be strictly increasing");
        }
    }
    if (positive && !(axis.front() > 0.0)) throw StencilError(std::string(name) + " axis must be positive");
}

}  // namespace

std::vector<SchemeGrid> scheme_run(const MarketModel& model, const Utility& u, const std::vector<double>& s_axis,
                                   const std::vector<double>& y_axis, const std::vector<double>& partition) {
    require_axis(s_axis, "s", true);
    require_axis(y_axis, "y", false);
    if (partition.size() < 2) throw DomainError("scheme_run: partition needs at least two times");
    for (std::size_t k = 1; k < partition.size(); ++k) {
        if (!(partition[k] > partition[k - 1])) throw DomainError("scheme_run: partition must be increasing");
    }
    const std::size_t ns = s_axis.size();
    const std::size_t ny = y_axis.size();
    const std::size_t n = model.n();
    const auto s_st = build_stencils(s_axis);
    const auto y_st = build_stencils(y_axis);

    std::vector<SchemeGrid> levels(partition.size());
    SchemeGrid& terminal = levels.back();
    terminal.s_axis = s_axis;
    terminal.y_axis = y_axis;
    terminal.t_level = partition.back();
    terminal.values.resize(ns * ny);
    for (std::size_t i = 0; i < ns; ++i) {
        const double v = u.value(s_axis[i]);
        for (std::size_t j = 0; j < ny; ++j) terminal.values[i * ny + j] = v;
    }

    std::vector<double> vs(ns * ny);
    for (std::size_t k = partition.size() - 1; k-- > 0;) {
        const SchemeGrid& next = levels[k + 1];
        const std::vector<double>& V = next.values;
        const double dt = partition[k + 1] - partition[k];

        // V_s on the whole grid first; V_sy is its y-derivative.
        parallel_for(ns, [&](std::size_t i) {
            const auto& st = s_st[i];
            for (std::size_t j = 0; j < ny; ++j) {
                double acc = 0.0;
                for (std::size_t q = 0; q < st.d1.size(); ++q) acc += st.d1[q] * V[(st.first + q) * ny + j];
                vs[i * ny + j] = acc;
            }
        });

        SchemeGrid& cur = levels[k];
        cur.s_axis = s_axis;
        cur.y_axis = y_axis;
        cur.t_level = partition[k];
        cur.values.assign(ns * ny, 0.0);
        parallel_for(ns, [&](std::size_t i) {
            const auto& sst = s_st[i];
            for (std::size_t j = 0; j < ny; ++j) {
                const auto& yst = y_st[j];
                RadialPartials r;
                r.v = V[i * ny + j];
                r.v_s = vs[i * ny + j];
                for (std::size_t q = 0; q < sst.d2.size(); ++q) r.v_ss += sst.d2[q] * V[(sst.first + q) * ny + j];
                for (std::size_t q = 0; q < yst.d1.size(); ++q) {
                    r.v_y += yst.d1[q] * V[i * ny + yst.first + q];
                    r.v_yy += yst.d2[q] * V[i * ny + yst.first + q];
                    r.v_sy += yst.d1[q] * vs[i * ny + yst.first + q];
                }
                const double y = y_axis[j];
                const PartialBundle p = PartialBundle::radial(n, r);
                const double h = hjb_operator(p, pi_hat(p, model, y), model, y);
                cur.values[i * ny + j] = r.v + dt * h;
            }
        });
    }
    return levels;
}

}  // namespace smalltime
