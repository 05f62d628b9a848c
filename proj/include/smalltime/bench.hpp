#pragma once

#include "smalltime/config.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace smalltime {

/// exp((1-alpha) lambda^2 horizon / (2 alpha)) * s^(1-alpha) / (1-alpha)
double merton_benchmark(double alpha, double lambda_sq, double horizon, double s);

double round_to(double v, int digits);

struct BenchRow {
    double s = 0.0;
    double u_mer = 0.0;
    double u_hat = 0.0;
    double abs_error = 0.0;
    double pct_error = 0.0;
};

/// Coefficients of s^(1-alpha) for the benchmark and the first-order approximation.
struct Table1Row {
    double t = 0.0;
    double T = 0.0;
    double u_mer_coeff = 0.0;
    double u_hat_coeff = 0.0;
    double abs_error_coeff = 0.0;
};

std::vector<Table1Row> reproduce_table1(const RunConfig& cfg, const std::vector<double>& times = {1.5, 1.9});

/// Values rounded to 6 decimals; abs/pct errors taken from the rounded values, pct rounded to 4.
std::vector<BenchRow> reproduce_table23(const RunConfig& cfg);

struct ExperimentResult {
    std::string csv;
    nlohmann::json summary;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int unexpected = 1;
inline constexpr int config = 2;
inline constexpr int validation = 3;
inline constexpr int budget = 4;
}  // namespace exit_code

/// Validates and dispatches without touching the filesystem. Throws on failure.
ExperimentResult execute_experiment(const RunConfig& cfg);

/// Runs the experiment and writes <output_path>.csv and <output_path>.json.
/// Returns an exit code; on failure writes a one-line diagnostic to `diag`.
int run_experiment(const RunConfig& cfg, std::ostream& diag);

std::string table23_csv(const std::vector<BenchRow>& rows);
std::string table1_csv(const std::vector<Table1Row>& rows);

}  // namespace smalltime
