#include "smalltime/bench.hpp"
#include "smalltime/config.hpp"
#include "smalltime/errors.hpp"
#include "smalltime/expansion.hpp"
#include "smalltime/policy.hpp"
#include "smalltime/simulator.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace smalltime;

namespace {

MarketModel parse_model(const std::string& text) { return model_from_json(nlohmann::json::parse(text)); }
Utility parse_utility(const std::string& text) { return utility_from_json(nlohmann::json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_smalltime, m) {
    m.doc() = "Small-time expansion of multi-asset portfolio value functions";

    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
    py::register_exception<StencilError>(m, "StencilError", PyExc_ValueError);

    m.def("default_model_json", [] { return model_to_json(two_asset::model()).dump(); });
    m.def("default_utility_json", [] { return utility_to_json(two_asset::utility()).dump(); });
    m.def("default_config_json", [](const std::string& experiment, double t) {
        return config_to_json(two_asset::run_config(experiment_from_string(experiment), t)).dump();
    });

    m.def("validate_model", [](const std::string& model) {
        const ValidationReport rep = validate_model(parse_model(model));
        std::vector<std::string> issues;
        for (const auto& i : rep.issues) issues.push_back(i.message);
        return issues;
    });

    m.def("utility_derivs", [](const std::string& u, double s, int order) { return parse_utility(u).derivs(s, order); },
          py::arg("utility"), py::arg("s"), py::arg("order"));

    m.def(
        "u1", [](const std::string& model, const std::string& u, const Eigen::VectorXd& x, double y) {
            return u1(parse_model(model), parse_utility(u), WealthPoint(x), y);
        },
        py::arg("model"), py::arg("utility"), py::arg("x"), py::arg("y"));
    m.def(
        "u2", [](const std::string& model, const std::string& u, const Eigen::VectorXd& x, double y) {
            return u2(parse_model(model), parse_utility(u), WealthPoint(x), y);
        },
        py::arg("model"), py::arg("utility"), py::arg("x"), py::arg("y"));
    m.def(
        "u_hat",
        [](const std::string& model, const std::string& u, double t, double T, const Eigen::VectorXd& x, double y) {
            return u_hat(parse_model(model), parse_utility(u), t, T, WealthPoint(x), y);
        },
        py::arg("model"), py::arg("utility"), py::arg("t"), py::arg("T"), py::arg("x"), py::arg("y"));
    m.def(
        "pi_zero", [](const std::string& model, const std::string& u, const Eigen::VectorXd& x, double y) {
            return pi_zero(parse_model(model), parse_utility(u), WealthPoint(x), y);
        },
        py::arg("model"), py::arg("utility"), py::arg("x"), py::arg("y"));
    m.def(
        "tilde_pi",
        [](const std::string& model, const std::string& u, double t, double T, const Eigen::VectorXd& x, double y) {
            return tilde_pi(parse_model(model), parse_utility(u), t, T, WealthPoint(x), y);
        },
        py::arg("model"), py::arg("utility"), py::arg("t"), py::arg("T"), py::arg("x"), py::arg("y"));
    m.def("merton_benchmark", &merton_benchmark, py::arg("alpha"), py::arg("lambda_sq"), py::arg("horizon"),
          py::arg("s"));

    m.def(
        "mc_value",
        [](const std::string& model, const std::string& u, const Eigen::VectorXd& x, double y, double t, double T,
           std::int64_t n_paths, double dt, std::uint64_t seed, const std::string& policy) {
            const MarketModel mm = parse_model(model);
            const Utility uu = parse_utility(u);
            SimConfig cfg;
            cfg.n_paths = n_paths;
            cfg.dt = dt;
            cfg.seed = seed;
            if (policy != "tilde_pi" && policy != "zero") throw ConfigError("policy must be 'tilde_pi' or 'zero'");
            const Policy p = policy == "zero" ? zero_policy(mm.n()) : tilde_pi_policy(mm, uu, T);
            PathEnsemble ens;
            {
                py::gil_scoped_release release;
                ens = simulate_paths(mm, p, WealthPoint(x), y, t, T, cfg);
            }
            const UtilityEstimate est = mc_expected_utility(ens, uu);
            return py::dict(py::arg("mean") = est.mean, py::arg("stderr") = est.std_error,
                            py::arg("floored_count") = ens.floored_count);
        },
        py::arg("model"), py::arg("utility"), py::arg("x"), py::arg("y"), py::arg("t"), py::arg("T"),
        py::arg("n_paths") = 10000, py::arg("dt") = 1e-3, py::arg("seed") = SimConfig{}.seed,
        py::arg("policy") = "tilde_pi");

    m.def("execute_experiment", [](const std::string& config) {
        ExperimentResult r;
        {
            const RunConfig cfg = config_from_json(nlohmann::json::parse(config));
            py::gil_scoped_release release;
            r = execute_experiment(cfg);
        }
        return py::make_tuple(r.csv, r.summary.dump());
    });

    m.def("run_experiment", [](const std::string& config) {
        std::ostringstream diag;
        int code;
        try {
            const RunConfig cfg = config_from_json(nlohmann::json::parse(config));
            py::gil_scoped_release release;
            code = run_experiment(cfg, diag);
        } catch (const ConfigError& e) {
            diag << "config error: " << e.what() << '\n';
            code = exit_code::config;
        } catch (const nlohmann::json::exception& e) {
            diag << "config error: " << e.what() << '\n';
            code = exit_code::config;
        }
        return py::make_tuple(code, diag.str());
    });
}
