#pragma once

#include "smalltime/market_model.hpp"
#include "smalltime/utility.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace smalltime {

struct SimConfig {
    std::int64_t n_paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 20240521;
    /// Absolute wealth floor; <= 0 selects 1e-10 * min(x0).
    double positivity_floor = 0.0;
    /// Upper bound on n_paths * steps.
    double max_path_steps = 4e9;

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Portfolio rule (tau, x, y) -> amounts invested in each risky asset.
using Policy = std::function<Eigen::VectorXd(double tau, const Eigen::VectorXd& x, double y)>;

Policy zero_policy(std::size_t n);
/// The close-to-optimal policy built from the first-order approximation.
Policy tilde_pi_policy(const MarketModel& model, const Utility& u, double T);

/// Draws (dW, dW0) with Cov(dW) = rho dt and dW0 independent with variance dt.
class IncrementSampler {
public:
    IncrementSampler(const Eigen::MatrixXd& rho, double dt);

    /// Drops any cached normal so a fresh stream starts cleanly.
    void reset() { normal_.reset(); }

    template <class Rng>
    void draw(Rng& rng, Eigen::VectorXd& dw, double& dw0) {
        for (Eigen::Index i = 0; i < z_.size(); ++i) z_[i] = normal_(rng);
        dw.noalias() = chol_ * z_;
        dw *= sqrt_dt_;
        dw0 = normal_(rng) * sqrt_dt_;
    }

    [[nodiscard]] const Eigen::MatrixXd& cholesky_factor() const noexcept { return chol_; }
    [[nodiscard]] bool jittered() const noexcept { return jittered_; }

private:
    Eigen::MatrixXd chol_;
    Eigen::VectorXd z_;
    double sqrt_dt_;
    bool jittered_ = false;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Free-function spelling: one draw of correlated increments.
template <class Rng>
std::pair<Eigen::VectorXd, double> correlated_increments(Rng& rng, IncrementSampler& sampler, std::size_t n) {
    Eigen::VectorXd dw(static_cast<Eigen::Index>(n));
    double dw0 = 0.0;
    sampler.draw(rng, dw, dw0);
    return {std::move(dw), dw0};
}

/// Independent generator for path `index` of a run seeded with `seed`.
std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t index);

struct PathEnsemble {
    Eigen::MatrixXd terminal_wealth;  // n_paths x n
    Eigen::VectorXd terminal_factor;  // n_paths
    std::int64_t floored_count = 0;   // paths that touched the positivity floor
    double floor = 0.0;
    /// Sample mean over paths of sum_i int sigma_i^2 pi_i^2 / X_i^2 dtau.
    double admissibility_monitor = 0.0;
    int steps = 0;
};

/// Euler-Maruyama simulation of wealth and factor from time t to T.
PathEnsemble simulate_paths(const MarketModel& model, const Policy& policy, const WealthPoint& x0, double y0,
                            double t, double T, const SimConfig& cfg);

struct UtilityEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double floored_fraction = 0.0;
    bool floor_alarm = false;  // floored_fraction > 0.1%
};

UtilityEstimate mc_expected_utility(const PathEnsemble& ens, const Utility& u);

/// Pairwise (cascade) summation; order-deterministic.
double pairwise_sum(const double* data, std::size_t count);

enum class StudyPolicy { TildePi, Zero };

struct StudyRow {
    double delta = 0.0;
    double mc_mean = 0.0;
    double std_error = 0.0;
    double u_hat = 0.0;
    double abs_error = 0.0;
    bool indistinguishable = false;  // |error| <= 3 stderr, excluded from the fit
    std::int64_t floored_count = 0;
};

struct StudyResult {
    std::vector<StudyRow> rows;
    double fitted_slope = 0.0;  // NaN when fewer than two usable points
    std::size_t points_used = 0;
};

StudyResult error_scaling_study(const MarketModel& model, const Utility& u, const WealthPoint& x0, double y0,
                                double T, const std::vector<double>& deltas, const SimConfig& cfg,
                                StudyPolicy policy = StudyPolicy::TildePi);

/// Least-squares slope of log|y| against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace smalltime
