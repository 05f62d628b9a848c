#include "smalltime/simulator.hpp"

#include "smalltime/errors.hpp"
#include "smalltime/expansion.hpp"
#include "smalltime/parallel.hpp"
#include "smalltime/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smalltime {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Policy zero_policy(std::size_t n) {
    return [n](double, const Eigen::VectorXd&, double) {
        return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)).eval();
    };
}

Policy tilde_pi_policy(const MarketModel& model, const Utility& u, double T) {
    return [model, u, T](double tau, const Eigen::VectorXd& x, double y) {
        return tilde_pi(model, u, std::min(tau, T), T, WealthPoint(x), y);
    };
}

IncrementSampler::IncrementSampler(const Eigen::MatrixXd& rho, double dt) : sqrt_dt_(std::sqrt(dt)) {
    if (!(dt > 0.0)) throw DomainError("increment sampler: dt must be > 0");
    Eigen::LLT<Eigen::MatrixXd> llt(rho);
    if (llt.info() != Eigen::Success) {
        const Eigen::MatrixXd jitter =
            rho + 1e-12 * Eigen::MatrixXd::Identity(rho.rows(), rho.cols());
        llt.compute(jitter);
        if (llt.info() != Eigen::Success) throw ModelError("correlation matrix is not positive semi-definite");
        jittered_ = true;
    }
    chol_ = llt.matrixL();
    z_.resize(rho.rows());
}

std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(seed)), static_cast<std::uint32_t>(splitmix64(seed) >> 32),
                      static_cast<std::uint32_t>(splitmix64(index ^ 0xA5A5A5A5ULL)),
                      static_cast<std::uint32_t>(splitmix64(seed ^ splitmix64(index)))};
    return std::mt19937_64(seq);
}

PathEnsemble simulate_paths(const MarketModel& model, const Policy& policy, const WealthPoint& x0, double y0,
                            double t, double T, const SimConfig& cfg) {
    if (x0.n() != model.n()) throw DomainError("simulate_paths: wealth dimension does not match the model");
    if (!(t < T)) throw DomainError("simulate_paths: need t < T");
    if (cfg.n_paths < 1) throw DomainError("simulate_paths: n_paths must be >= 1");
    if (!(cfg.dt > 0.0) || cfg.dt > (T - t) * (1.0 + 1e-12)) {
        throw DomainError("simulate_paths: dt must lie in (0, T - t]");
    }
    const int steps = std::max(1, static_cast<int>(std::lround((T - t) / cfg.dt)));
    if (static_cast<double>(cfg.n_paths) * steps > cfg.max_path_steps) {
        throw BudgetError("simulate_paths: n_paths * steps exceeds the budget guard");
    }
    const double h = (T - t) / steps;
    const auto n = static_cast<Eigen::Index>(model.n());
    const double floor = cfg.positivity_floor > 0.0 ? cfg.positivity_floor : 1e-10 * x0.x().minCoeff();
    const double idio = std::sqrt(std::max(0.0, model.idiosyncratic_weight()));
    const IncrementSampler proto(model.rho, h);

    const auto paths = static_cast<std::size_t>(cfg.n_paths);
    PathEnsemble ens;
    ens.terminal_wealth.resize(static_cast<Eigen::Index>(paths), n);
    ens.terminal_factor.resize(static_cast<Eigen::Index>(paths));
    ens.floor = floor;
    ens.steps = steps;
    std::vector<unsigned char> floored(paths, 0);
    std::vector<double> monitor(paths, 0.0);

    parallel_for(paths, [&](std::size_t p) {
        auto rng = path_stream(cfg.seed, p);
        IncrementSampler sampler = proto;
        sampler.reset();
        Eigen::VectorXd x = x0.x();
        double y = y0;
        Eigen::VectorXd dw(n);
        double dw0 = 0.0;
        double adm = 0.0;
        bool hit = false;
        for (int k = 0; k < steps; ++k) {
            const double tau = t + k * h;
            const Eigen::VectorXd pi = policy(tau, x, y);
            sampler.draw(rng, dw, dw0);
            const double av = model.a(y);
            const double bv = model.b(y);
            double factor_noise = idio * dw0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const double sp = model.sigma[ui](y) * pi[i];
                adm += sp * sp / (x[i] * x[i]) * h;
                x[i] += sp * (model.lambda[ui](y) * h + dw[i]);
                if (x[i] < floor) {
                    x[i] = floor;
                    hit = true;
                }
                factor_noise += model.omega[i] * dw[i];
            }
            y += bv * h + av * factor_noise;
        }
        ens.terminal_wealth.row(static_cast<Eigen::Index>(p)) = x.transpose();
        ens.terminal_factor[static_cast<Eigen::Index>(p)] = y;
        floored[p] = hit ? 1 : 0;
        monitor[p] = adm;
    });

    ens.floored_count = std::count(floored.begin(), floored.end(), static_cast<unsigned char>(1));
    ens.admissibility_monitor = pairwise_sum(monitor.data(), monitor.size()) / static_cast<double>(paths);
    return ens;
}

double pairwise_sum(const double* data, std::size_t count) {
    if (count <= 8) {
        double acc = 0.0;
        for (std::size_t i = 0; i < count; ++i) acc += data[i];
        return acc;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

UtilityEstimate mc_expected_utility(const PathEnsemble& ens, const Utility& u) {
    const auto paths = static_cast<std::size_t>(ens.terminal_wealth.rows());
    if (paths == 0) throw DomainError("mc_expected_utility: empty ensemble");
    std::vector<double> vals(paths);
    for (std::size_t p = 0; p < paths; ++p) vals[p] = u.value(ens.terminal_wealth.row(static_cast<Eigen::Index>(p)).sum());
    UtilityEstimate est;
    est.mean = pairwise_sum(vals.data(), paths) / static_cast<double>(paths);
    if (paths > 1) {
        for (double& v : vals) v = (v - est.mean) * (v - est.mean);
        const double var = pairwise_sum(vals.data(), paths) / static_cast<double>(paths - 1);
        est.std_error = std::sqrt(var / static_cast<double>(paths));
    }
    est.floored_fraction = static_cast<double>(ens.floored_count) / static_cast<double>(paths);
    est.floor_alarm = est.floored_fraction > 1e-3;
    return est;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DomainError("loglog_slope: size mismatch");
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(std::abs(y[i]));
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(std::abs(y[i])) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

StudyResult error_scaling_study(const MarketModel& model, const Utility& u, const WealthPoint& x0, double y0,
                                double T, const std::vector<double>& deltas, const SimConfig& cfg,
                                StudyPolicy which) {
    if (deltas.empty()) throw DomainError("error_scaling_study: no deltas");
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0)) throw DomainError("error_scaling_study: deltas must be positive");
        if (k > 0 && !(deltas[k] < deltas[k - 1])) {
            throw DomainError("error_scaling_study: deltas must be sorted descending");
        }
    }
    const Policy policy = which == StudyPolicy::TildePi ? tilde_pi_policy(model, u, T) : zero_policy(model.n());

    StudyResult res;
    std::vector<double> fx, fy;
    for (double delta : deltas) {
        const double t = T - delta;
        const PathEnsemble ens = simulate_paths(model, policy, x0, y0, t, T, cfg);
        const UtilityEstimate est = mc_expected_utility(ens, u);
        StudyRow row;
        row.delta = delta;
        row.mc_mean = est.mean;
        row.std_error = est.std_error;
        row.u_hat = u_hat(model, u, t, T, x0, y0);
        row.abs_error = std::abs(est.mean - row.u_hat);
        row.indistinguishable = row.abs_error <= 3.0 * est.std_error;
        row.floored_count = ens.floored_count;
        if (!row.indistinguishable) {
            fx.push_back(delta);
            fy.push_back(row.abs_error);
        }
        res.rows.push_back(row);
    }
    res.points_used = fx.size();
    res.fitted_slope = loglog_slope(fx, fy);
    return res;
}

}  // namespace smalltime
