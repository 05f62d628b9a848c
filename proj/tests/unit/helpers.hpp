#pragma once

#include "smalltime/market_model.hpp"
#include "smalltime/utility.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

inline bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

inline std::vector<double> log_space(double lo, double hi, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
    return out;
}

/// Random correlation matrix: normalized Gram matrix of random vectors, shrunk toward the identity.
inline Eigen::MatrixXd random_correlation(std::mt19937_64& rng, int n, double shrink = 0.5) {
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd v(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = z(rng);
    Eigen::MatrixXd g = v * v.transpose();
    Eigen::VectorXd d = g.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd c = d.asDiagonal() * g * d.asDiagonal();
    Eigen::MatrixXd r = shrink * c + (1.0 - shrink) * Eigen::MatrixXd::Identity(n, n);
    r.diagonal().setOnes();
    return r;
}

/// Random valid model with smooth y-dependent coefficients.
inline smalltime::MarketModel random_model(std::mt19937_64& rng, int n, bool y_dependent = true) {
    using smalltime::ScalarField;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    smalltime::MarketModel m;
    for (int i = 0; i < n; ++i) {
        const double sig = 0.1 + 0.3 * u01(rng);
        const double lam = -0.5 + 1.5 * u01(rng);
        if (y_dependent) {
            m.sigma.push_back(ScalarField::tanh_bounded(sig, 0.3 * sig * u01(rng), u01(rng), 0.5 + u01(rng)));
            m.lambda.push_back(ScalarField::tanh_bounded(lam, 0.3 * u01(rng), -u01(rng), 0.5 + 2.0 * u01(rng)));
        } else {
            m.sigma.push_back(ScalarField::constant(sig));
            m.lambda.push_back(ScalarField::constant(lam));
        }
    }
    m.a = y_dependent ? ScalarField::tanh_bounded(0.6, 0.2, 0.3, 1.5) : ScalarField::constant(0.6);
    m.b = y_dependent ? ScalarField::tanh_bounded(0.05, 0.1, -0.2, 2.0) : ScalarField::constant(0.05);
    m.omega.resize(n);
    for (int i = 0; i < n; ++i) m.omega[i] = (u01(rng) - 0.5) * 0.8 / std::sqrt(static_cast<double>(n));
    m.rho = random_correlation(rng, n);
    return m;
}

inline smalltime::Utility random_utility(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    switch (pick(rng)) {
        case 0: return smalltime::Utility::log();
        case 1: return smalltime::Utility::power(0.5 + u01(rng), 1.5 + 3.0 * u01(rng));
        case 2: return smalltime::Utility::power(0.5 + u01(rng), 0.2 + 0.6 * u01(rng));
        default: return smalltime::Utility::power(1.0, 2.0 + u01(rng), 0.5 + u01(rng), 4.0 + u01(rng));
    }
}

inline smalltime::WealthPoint random_wealth(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.2, 2.0);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = u(rng);
    return smalltime::WealthPoint(x);
}

}  // namespace testing_support
