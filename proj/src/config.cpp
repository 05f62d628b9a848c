#include "smalltime/config.hpp"

#include "smalltime/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace smalltime {

using nlohmann::json;

namespace {

template <class T>
T required(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

template <class T>
T optional_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::Table1: return "table1";
        case Experiment::Table23: return "table23";
        case Experiment::ErrorScaling: return "error_scaling";
        case Experiment::Scheme: return "scheme";
        case Experiment::PolicyEval: return "policy_eval";
    }
    return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
    if (name == "table1") return Experiment::Table1;
    if (name == "table23") return Experiment::Table23;
    if (name == "error_scaling" || name == "error-scaling") return Experiment::ErrorScaling;
    if (name == "scheme") return Experiment::Scheme;
    if (name == "policy_eval" || name == "policy-eval") return Experiment::PolicyEval;
    throw ConfigError("config: unknown experiment '" + name + "'");
}

bool operator==(const RunConfig& l, const RunConfig& r) {
    return l.model == r.model && l.utility == r.utility && l.experiment == r.experiment && l.t == r.t &&
           l.T == r.T && l.y == r.y && l.wealth_grid == r.wealth_grid && l.output_path == r.output_path &&
           l.sim == r.sim && l.deltas == r.deltas && l.study_policy == r.study_policy && l.scheme == r.scheme;
}

void check_run_config(const RunConfig& cfg) {
    if (!(cfg.t < cfg.T)) throw ModelError("run config: t must be < T");
    if (!(cfg.t >= 0.0)) throw ModelError("run config: t must be >= 0");
    for (std::size_t k = 0; k < cfg.wealth_grid.size(); ++k) {
        if (!(cfg.wealth_grid[k] > 0.0)) throw ModelError("run config: wealth grid must be strictly positive");
        if (k > 0 && !(cfg.wealth_grid[k] > cfg.wealth_grid[k - 1])) {
            throw ModelError("run config: wealth grid must be ascending");
        }
    }
}

json field_to_json(const ScalarField& f) {
    return {{"kind", f.kind() == ScalarField::Kind::Constant ? "constant" : "tanh_bounded"}, {"params", f.params()}};
}

ScalarField field_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: scalar field must be an object");
    const auto kind = required<std::string>(j, "kind");
    const auto p = required<std::vector<double>>(j, "params");
    if (kind == "constant") {
        if (p.size() != 1) throw ConfigError("config: constant field takes 1 parameter");
        return ScalarField::constant(p[0]);
    }
    if (kind == "tanh_bounded") {
        if (p.size() != 4) throw ConfigError("config: tanh_bounded field takes 4 parameters");
        return ScalarField::tanh_bounded(p[0], p[1], p[2], p[3]);
    }
    throw ConfigError("config: unknown field kind '" + kind + "'");
}

json model_to_json(const MarketModel& m) {
    json assets = json::array();
    for (std::size_t i = 0; i < m.n(); ++i) {
        assets.push_back({{"sigma", field_to_json(m.sigma[i])}, {"lambda", field_to_json(m.lambda[i])}});
    }
    std::vector<double> rho;
    for (Eigen::Index i = 0; i < m.rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.rho.cols(); ++j) rho.push_back(m.rho(i, j));
    }
    return {{"n", m.n()},
            {"assets", assets},
            {"a", field_to_json(m.a)},
            {"b", field_to_json(m.b)},
            {"omega", std::vector<double>(m.omega.data(), m.omega.data() + m.omega.size())},
            {"rho", rho},
            {"rate", m.rate}};
}

MarketModel model_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: model must be an object");
    const auto n = required<std::size_t>(j, "n");
    const json& assets = j.contains("assets") ? j.at("assets") : json();
    if (!assets.is_array() || assets.size() != n) throw ConfigError("config: model.assets must list n assets");
    MarketModel m;
    for (const auto& a : assets) {
        if (!a.contains("sigma") || !a.contains("lambda")) throw ConfigError("config: asset needs sigma and lambda");
        m.sigma.push_back(field_from_json(a.at("sigma")));
        m.lambda.push_back(field_from_json(a.at("lambda")));
    }
    m.a = j.contains("a") ? field_from_json(j.at("a")) : ScalarField::constant(1.0);
    m.b = j.contains("b") ? field_from_json(j.at("b")) : ScalarField::constant(0.0);
    const auto omega = optional_or<std::vector<double>>(j, "omega", std::vector<double>(n, 0.0));
    if (omega.size() != n) throw ConfigError("config: omega must have n entries");
    m.omega = Eigen::Map<const Eigen::VectorXd>(omega.data(), static_cast<Eigen::Index>(n));
    const auto rho = required<std::vector<double>>(j, "rho");
    if (rho.size() != n * n) throw ConfigError("config: rho must have n*n entries (row-major)");
    m.rho.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            m.rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rho[r * n + c];
        }
    }
    m.rate = optional_or<double>(j, "rate", 0.0);
    return m;
}

json utility_to_json(const Utility& u) {
    if (u.kind() == Utility::Kind::Log) return {{"kind", "log"}};
    return {{"kind", "power"}, {"c1", u.c1()}, {"alpha", u.alpha()}, {"c2", u.c2()}, {"beta", u.beta()}};
}

Utility utility_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: utility must be an object");
    const auto kind = required<std::string>(j, "kind");
    if (kind == "log") return Utility::log();
    if (kind == "power") {
        const double alpha = required<double>(j, "alpha");
        return Utility::power(optional_or<double>(j, "c1", 1.0), alpha, optional_or<double>(j, "c2", 0.0),
                              optional_or<double>(j, "beta", alpha));
    }
    throw ConfigError("config: unknown utility kind '" + kind + "'");
}

json sim_to_json(const SimConfig& s) {
    return {{"n_paths", s.n_paths},
            {"dt", s.dt},
            {"seed", s.seed},
            {"positivity_floor", s.positivity_floor},
            {"max_path_steps", s.max_path_steps}};
}

SimConfig sim_from_json(const json& j) {
    SimConfig s;
    s.n_paths = optional_or<std::int64_t>(j, "n_paths", s.n_paths);
    s.dt = optional_or<double>(j, "dt", s.dt);
    s.seed = optional_or<std::uint64_t>(j, "seed", s.seed);
    s.positivity_floor = optional_or<double>(j, "positivity_floor", s.positivity_floor);
    s.max_path_steps = optional_or<double>(j, "max_path_steps", s.max_path_steps);
    return s;
}

json config_to_json(const RunConfig& c) {
    json j = {{"model", model_to_json(c.model)},
              {"utility", utility_to_json(c.utility)},
              {"experiment", to_string(c.experiment)},
              {"t", c.t},
              {"T", c.T},
              {"y", c.y},
              {"wealth_grid", c.wealth_grid},
              {"output_path", c.output_path},
              {"deltas", c.deltas},
              {"policy", c.study_policy == StudyPolicy::TildePi ? "tilde_pi" : "zero"},
              {"scheme",
               {{"s_min", c.scheme.s_min},
                {"s_max", c.scheme.s_max},
                {"s_count", c.scheme.s_count},
                {"y_half_width", c.scheme.y_half_width},
                {"y_count", c.scheme.y_count},
                {"steps", c.scheme.steps}}}};
    if (c.sim) j["sim"] = sim_to_json(*c.sim);
    return j;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    RunConfig c;
    if (!j.contains("model")) throw ConfigError("config: missing key 'model'");
    c.model = model_from_json(j.at("model"));
    if (!j.contains("utility")) throw ConfigError("config: missing key 'utility'");
    c.utility = utility_from_json(j.at("utility"));
    c.experiment = experiment_from_string(optional_or<std::string>(j, "experiment", "table23"));
    c.t = required<double>(j, "t");
    c.T = required<double>(j, "T");
    c.y = optional_or<double>(j, "y", 0.0);
    c.wealth_grid = optional_or<std::vector<double>>(j, "wealth_grid", {});
    c.output_path = optional_or<std::string>(j, "output_path", c.output_path);
    if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"));
    c.deltas = optional_or<std::vector<double>>(j, "deltas", c.deltas);
    const auto policy = optional_or<std::string>(j, "policy", "tilde_pi");
    if (policy == "tilde_pi") {
        c.study_policy = StudyPolicy::TildePi;
    } else if (policy == "zero") {
        c.study_policy = StudyPolicy::Zero;
    } else {
        throw ConfigError("config: policy must be 'tilde_pi' or 'zero'");
    }
    if (j.contains("scheme")) {
        const json& s = j.at("scheme");
        c.scheme.s_min = optional_or<double>(s, "s_min", c.scheme.s_min);
        c.scheme.s_max = optional_or<double>(s, "s_max", c.scheme.s_max);
        c.scheme.s_count = optional_or<int>(s, "s_count", c.scheme.s_count);
        c.scheme.y_half_width = optional_or<double>(s, "y_half_width", c.scheme.y_half_width);
        c.scheme.y_count = optional_or<int>(s, "y_count", c.scheme.y_count);
        c.scheme.steps = optional_or<int>(s, "steps", c.scheme.steps);
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

namespace two_asset {

MarketModel model() {
    MarketModel m;
    const double lam = std::sqrt(lambda_sq);
    m.sigma = {ScalarField::constant(sigma), ScalarField::constant(sigma)};
    m.lambda = {ScalarField::constant(lam), ScalarField::constant(lam)};
    m.a = ScalarField::constant(1.0);
    m.b = ScalarField::constant(0.0);
    m.omega = Eigen::VectorXd::Zero(2);
    m.rho.resize(2, 2);
    m.rho << 1.0, rho12, rho12, 1.0;
    m.rate = 0.0;
    return m;
}

Utility utility() { return Utility::power(1.0, 3.0); }

std::vector<double> wealth_grid() {
    std::vector<double> g;
    for (int k = 4; k <= 16; ++k) g.push_back(k / 10.0);
    return g;
}

RunConfig run_config(Experiment e, double t) {
    RunConfig c;
    c.model = model();
    c.utility = utility();
    c.experiment = e;
    c.t = t;
    c.T = horizon;
    c.y = factor_level;
    c.wealth_grid = wealth_grid();
    c.output_path = "two_asset_" + to_string(e);
    c.scheme.y_half_width = 1.0;
    return c;
}

}  // namespace two_asset

}  // namespace smalltime
