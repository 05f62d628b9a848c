#pragma once

#include "smalltime/market_model.hpp"
#include "smalltime/simulator.hpp"
#include "smalltime/utility.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smalltime {

/// Unreadable or structurally malformed configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Experiment { Table1, Table23, ErrorScaling, Scheme, PolicyEval };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct SchemeSettings {
    double s_min = 0.4;
    double s_max = 1.6;
    int s_count = 201;
    double y_half_width = 1.0;
    int y_count = 21;
    int steps = 1;

    friend bool operator==(const SchemeSettings&, const SchemeSettings&) = default;
};

struct RunConfig {
    MarketModel model;
    Utility utility = Utility::log();
    Experiment experiment = Experiment::Table23;
    double t = 1.5;
    double T = 2.0;
    double y = 0.0;
    std::vector<double> wealth_grid;
    std::string output_path = "run";
    std::optional<SimConfig> sim;
    std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
    StudyPolicy study_policy = StudyPolicy::TildePi;
    SchemeSettings scheme;

    friend bool operator==(const RunConfig&, const RunConfig&);
};

/// Structural checks of RunConfig invariants (t < T, positive ascending wealth grid).
void check_run_config(const RunConfig& cfg);

// JSON (de)serialization. Field layout:
//   model:   {n, assets: [{sigma: {kind, params}, lambda: {kind, params}}], a, b, omega, rho (row-major), rate}
//   utility: {kind: "log"} | {kind: "power", c1, alpha, c2, beta}
//   experiment, t, T, y, wealth_grid, output_path, sim?, deltas, policy, scheme
nlohmann::json field_to_json(const ScalarField& f);
ScalarField field_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const MarketModel& m);
MarketModel model_from_json(const nlohmann::json& j);
nlohmann::json utility_to_json(const Utility& u);
Utility utility_from_json(const nlohmann::json& j);
nlohmann::json sim_to_json(const SimConfig& s);
SimConfig sim_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);

RunConfig load_config(const std::string& path);

/// The two-asset configuration behind the benchmark tables.
namespace two_asset {
inline constexpr double lambda_sq = 0.0002354511446;
inline constexpr double rho12 = 0.5241;
inline constexpr double factor_level = 27.9345;
inline constexpr double horizon = 2.0;
inline constexpr double sigma = 0.2;

MarketModel model();
Utility utility();
std::vector<double> wealth_grid();
RunConfig run_config(Experiment e, double t);
}  // namespace two_asset

}  // namespace smalltime
