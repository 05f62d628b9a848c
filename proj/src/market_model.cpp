#include "smalltime/market_model.hpp"

#include "smalltime/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace smalltime {

ScalarField ScalarField::constant(double c) {
    ScalarField f;
    f.kind_ = Kind::Constant;
    f.base_ = c;
    return f;
}

ScalarField ScalarField::tanh_bounded(double base, double amplitude, double center, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ModelError("tanh_bounded field needs a positive finite scale");
    }
    ScalarField f;
    f.kind_ = Kind::TanhBounded;
    f.base_ = base;
    f.amplitude_ = amplitude;
    f.center_ = center;
    f.scale_ = scale;
    return f;
}

FieldValue ScalarField::eval(double y) const {
    if (kind_ == Kind::Constant) return {base_, 0.0, 0.0};
    const double th = std::tanh((y - center_) / scale_);
    const double sech2 = 1.0 - th * th;
    return {base_ + amplitude_ * th,
            amplitude_ * sech2 / scale_,
            -2.0 * amplitude_ * th * sech2 / (scale_ * scale_)};
}

std::vector<double> ScalarField::params() const {
    if (kind_ == Kind::Constant) return {base_};
    return {base_, amplitude_, center_, scale_};
}

double ScalarField::lower_bound() const {
    if (kind_ == Kind::Constant) return base_;
    return base_ - std::abs(amplitude_);
}

Eigen::VectorXd MarketModel::drift(double y) const {
    Eigen::VectorXd mu(n());
    for (std::size_t i = 0; i < n(); ++i) mu[i] = rate + sigma[i](y) * lambda[i](y);
    return mu;
}

Eigen::VectorXd MarketModel::sigma_at(double y) const {
    Eigen::VectorXd v(n());
    for (std::size_t i = 0; i < n(); ++i) v[i] = sigma[i](y);
    return v;
}

Eigen::VectorXd MarketModel::lambda_at(double y) const {
    Eigen::VectorXd v(n());
    for (std::size_t i = 0; i < n(); ++i) v[i] = lambda[i](y);
    return v;
}

double MarketModel::idiosyncratic_weight() const { return 1.0 - omega.squaredNorm(); }

bool operator==(const MarketModel& l, const MarketModel& r) {
    return l.sigma == r.sigma && l.lambda == r.lambda && l.a == r.a && l.b == r.b &&
           l.omega.size() == r.omega.size() && l.omega == r.omega &&
           l.rho.rows() == r.rho.rows() && l.rho.cols() == r.rho.cols() && l.rho == r.rho &&
           l.rate == r.rate;
}

std::vector<SharpeTriple> sharpe_vector(const MarketModel& model, double y) {
    std::vector<SharpeTriple> out;
    out.reserve(model.n());
    for (const auto& f : model.lambda) {
        const auto v = f.eval(y);
        out.push_back({v.value, v.d1, v.d2});
    }
    return out;
}

DominanceReport check_diagonal_dominance(const MarketModel& model, const std::vector<double>& y_grid) {
    if (y_grid.empty()) throw DomainError("check_diagonal_dominance: empty y grid");
    DominanceReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    const std::size_t n = model.n();
    for (double y : y_grid) {
        const Eigen::VectorXd sig = model.sigma_at(y);
        for (std::size_t i = 0; i < n; ++i) {
            double off = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) off += model.rho(i, j) * sig[j];
            }
            const double margin = 2.0 * sig[i] - off;
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_y = y;
                rep.worst_asset = i;
            }
        }
    }
    rep.ok = rep.worst_margin > 0.0;
    return rep;
}

std::vector<double> default_probe_grid() {
    std::vector<double> g(1001);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = -50.0 + 0.1 * static_cast<double>(k);
    return g;
}

std::string ValidationReport::summary() const {
    if (issues.empty()) return "ok";
    std::ostringstream os;
    for (std::size_t k = 0; k < issues.size(); ++k) {
        if (k) os << "; ";
        os << issues[k].assumption << ": " << issues[k].message;
    }
    return os.str();
}

ValidationReport validate_model(const MarketModel& model, const std::vector<double>& probe_grid) {
    ValidationReport rep;
    auto fail = [&rep](std::string assumption, std::string msg) {
        rep.issues.push_back({std::move(assumption), std::move(msg)});
    };

    const std::size_t n = model.n();
    if (n == 0) {
        fail("model", "asset count must be at least 1");
        return rep;
    }
    if (model.lambda.size() != n) fail("model", "lambda must have one field per asset");
    if (static_cast<std::size_t>(model.omega.size()) != n) fail("model", "omega must have n entries");
    if (static_cast<std::size_t>(model.rho.rows()) != n || static_cast<std::size_t>(model.rho.cols()) != n) {
        fail("model", "rho must be n x n");
    }
    if (!rep.ok()) return rep;

    // correlation matrix
    const Eigen::MatrixXd& rho = model.rho;
    if (!rho.allFinite()) fail("correlation", "rho has non-finite entries");
    if ((rho - rho.transpose()).cwiseAbs().maxCoeff() > 1e-14) fail("correlation", "rho must be symmetric");
    for (std::size_t i = 0; i < n; ++i) {
        if (rho(i, i) != 1.0) fail("correlation", "rho must have unit diagonal");
    }
    if (rho.cwiseAbs().maxCoeff() > 1.0) fail("correlation", "|rho_ij| must not exceed 1");
    if (rep.ok()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (rho + rho.transpose()),
                                                           Eigen::EigenvaluesOnly);
        rep.min_rho_eigenvalue = eig.eigenvalues().minCoeff();
        if (rep.min_rho_eigenvalue < -1e-12) fail("correlation", "rho must be positive semi-definite");
    }

    // factor loadings
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::abs(model.omega[i]) < 1.0)) fail("factor loadings", "|omega_i| must be < 1");
    }
    if (model.idiosyncratic_weight() < 0.0) fail("factor loadings", "1 - sum omega^2 < 0");

    // positivity of sigma and a
    for (std::size_t i = 0; i < n; ++i) {
        if (!(model.sigma[i].lower_bound() > 0.0)) fail("positivity", "sigma must be strictly positive");
    }
    if (!(model.a.lower_bound() > 0.0)) fail("positivity", "factor volatility a must be strictly positive");

    // finiteness and drift recovery on the probe grid
    if (!probe_grid.empty()) {
        bool finite = std::isfinite(model.rate);
        for (double y : probe_grid) {
            for (std::size_t i = 0; i < n && finite; ++i) {
                const auto s = model.sigma[i].eval(y);
                const auto l = model.lambda[i].eval(y);
                finite = std::isfinite(s.value) && std::isfinite(l.value) && std::isfinite(l.d1) &&
                         std::isfinite(l.d2) && std::isfinite(model.rate + s.value * l.value);
            }
            const auto av = model.a.eval(y);
            const auto bv = model.b.eval(y);
            finite = finite && std::isfinite(av.value) && std::isfinite(av.d1) && std::isfinite(av.d2) &&
                     std::isfinite(bv.value) && std::isfinite(bv.d1);
            if (!finite) break;
        }
        if (!finite) fail("boundedness", "coefficient fields must be finite on the probe grid");
    }

    if (rep.ok()) {
        const double wr = model.omega.dot(model.rho * model.omega);
        rep.factor_variance_multiplier = wr + model.idiosyncratic_weight();
    }
    return rep;
}

void require_valid(const MarketModel& model, const std::vector<double>& probe_grid) {
    const auto rep = validate_model(model, probe_grid);
    if (!rep.ok()) throw ModelError(rep.summary());
}

}  // namespace smalltime
