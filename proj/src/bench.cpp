#include "smalltime/bench.hpp"

#include "smalltime/errors.hpp"
#include "smalltime/expansion.hpp"
#include "smalltime/policy.hpp"
#include "smalltime/simulator.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace smalltime {

using nlohmann::json;

double merton_benchmark(double alpha, double lambda_sq, double horizon, double s) {
    if (!(alpha > 0.0) || alpha == 1.0) throw DomainError("merton_benchmark: alpha must be > 0 and != 1");
    if (!(s > 0.0)) throw DomainError("merton_benchmark: s must be > 0");
    return std::exp((1.0 - alpha) * lambda_sq * horizon / (2.0 * alpha)) * std::pow(s, 1.0 - alpha) / (1.0 - alpha);
}

double round_to(double v, int digits) {
    const double scale = std::pow(10.0, digits);
    return std::round(v * scale) / scale;
}

namespace {

struct PowerBench {
    double alpha;
    double c1;
    double lambda_sq;
};

PowerBench power_bench(const RunConfig& cfg) {
    const Utility& u = cfg.utility;
    if (u.kind() != Utility::Kind::PowerMixture || (u.c2() != 0.0 && u.beta() != u.alpha())) {
        throw ModelError("table reproduction needs a single power utility");
    }
    const double lam = cfg.model.lambda.at(0)(cfg.y);
    return {u.alpha(), u.c1() + u.c2(), lam * lam};
}

std::string fmt(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string full(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        out[static_cast<std::size_t>(k)] = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    }
    return out;
}

double wealth_start(const RunConfig& cfg) { return cfg.wealth_grid.empty() ? 1.0 : cfg.wealth_grid.front(); }

std::vector<double> envelope_y_values(double y) {
    std::vector<double> ys = linspace(-50.0, 50.0, 101);
    ys.push_back(y);
    return ys;
}

ExperimentResult run_table1(const RunConfig& cfg) {
    const auto rows = reproduce_table1(cfg);
    ExperimentResult r{table1_csv(rows), json::object()};
    json out = json::array();
    for (const auto& row : rows) {
        out.push_back({{"t", row.t}, {"u_hat_coeff", row.u_hat_coeff}, {"abs_error_coeff", row.abs_error_coeff}});
    }
    r.summary["rows"] = out;
    return r;
}

ExperimentResult run_table23(const RunConfig& cfg) {
    const auto rows = reproduce_table23(cfg);
    ExperimentResult r{table23_csv(rows), json::object()};
    r.summary["row_count"] = rows.size();
    return r;
}

ExperimentResult run_error_scaling(const RunConfig& cfg) {
    const SimConfig sim = cfg.sim.value_or(SimConfig{});
    const WealthPoint x0 = WealthPoint::split_evenly(wealth_start(cfg), cfg.model.n());
    const StudyResult study =
        error_scaling_study(cfg.model, cfg.utility, x0, cfg.y, cfg.T, cfg.deltas, sim, cfg.study_policy);
    const double cap = u2_bound_scan(cfg.model, cfg.utility, default_u2_scan_wealth(), envelope_y_values(cfg.y));

    std::ostringstream csv;
    csv << "delta,mc_mean,stderr,u_hat,abs_error\n";
    json rows = json::array();
    bool all_inside = true;
    bool all_indistinguishable = true;
    for (const auto& row : study.rows) {
        csv << full(row.delta) << ',' << full(row.mc_mean) << ',' << full(row.std_error) << ',' << full(row.u_hat)
            << ',' << full(row.abs_error) << '\n';
        const Envelope env = super_sub(cfg.model, cfg.utility, cfg.T - row.delta, cfg.T, x0, cfg.y, cap);
        const bool inside = row.mc_mean >= env.lower - 3.0 * row.std_error &&
                            row.mc_mean <= env.upper + 3.0 * row.std_error;
        all_inside = all_inside && inside;
        all_indistinguishable = all_indistinguishable && row.indistinguishable;
        rows.push_back({{"delta", row.delta},
                        {"indistinguishable", row.indistinguishable},
                        {"floored_count", row.floored_count},
                        {"envelope_lower", env.lower},
                        {"envelope_upper", env.upper},
                        {"inside_envelope", inside}});
    }
    ExperimentResult r{csv.str(), json::object()};
    r.summary["rows"] = rows;
    r.summary["fitted_slope"] = std::isnan(study.fitted_slope) ? json(nullptr) : json(study.fitted_slope);
    r.summary["points_used"] = study.points_used;
    r.summary["all_indistinguishable"] = all_indistinguishable;
    r.summary["all_inside_envelope"] = all_inside;
    r.summary["u2_cap"] = cap;
    r.summary["seed"] = sim.seed;
    return r;
}

ExperimentResult run_policy_eval(const RunConfig& cfg) {
    const SimConfig sim = cfg.sim.value_or(SimConfig{});
    const double cap = u2_bound_scan(cfg.model, cfg.utility, default_u2_scan_wealth(), envelope_y_values(cfg.y));
    const Policy policy = tilde_pi_policy(cfg.model, cfg.utility, cfg.T);
    std::vector<double> grid = cfg.wealth_grid;
    if (grid.empty()) grid.push_back(1.0);

    std::ostringstream csv;
    csv << "s,mc_mean,stderr,u_hat,envelope_lower,envelope_upper\n";
    bool all_inside = true;
    for (double s : grid) {
        const WealthPoint x0 = WealthPoint::split_evenly(s, cfg.model.n());
        const UtilityEstimate est =
            mc_expected_utility(simulate_paths(cfg.model, policy, x0, cfg.y, cfg.t, cfg.T, sim), cfg.utility);
        const Envelope env = super_sub(cfg.model, cfg.utility, cfg.t, cfg.T, x0, cfg.y, cap);
        all_inside = all_inside && est.mean >= env.lower - 3.0 * est.std_error &&
                     est.mean <= env.upper + 3.0 * est.std_error;
        csv << full(s) << ',' << full(est.mean) << ',' << full(est.std_error) << ','
            << full(u_hat(cfg.model, cfg.utility, cfg.t, cfg.T, x0, cfg.y)) << ',' << full(env.lower) << ','
            << full(env.upper) << '\n';
    }
    ExperimentResult r{csv.str(), json::object()};
    r.summary["all_inside_envelope"] = all_inside;
    r.summary["u2_cap"] = cap;
    r.summary["seed"] = sim.seed;
    return r;
}

ExperimentResult run_scheme(const RunConfig& cfg) {
    const SchemeSettings& sc = cfg.scheme;
    const auto s_axis = linspace(sc.s_min, sc.s_max, sc.s_count);
    const auto y_axis = linspace(cfg.y - sc.y_half_width, cfg.y + sc.y_half_width, sc.y_count);
    const auto partition = linspace(cfg.t, cfg.T, sc.steps + 1);
    const auto grids = scheme_run(cfg.model, cfg.utility, s_axis, y_axis, partition);
    const SchemeGrid& g = grids.front();

    std::ostringstream csv;
    csv << "s,y,v_scheme,u_hat,abs_error\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < s_axis.size(); ++i) {
        const WealthPoint x = WealthPoint::split_evenly(s_axis[i], cfg.model.n());
        for (std::size_t j = 0; j < y_axis.size(); ++j) {
            const double ref = u_hat(cfg.model, cfg.utility, cfg.t, cfg.T, x, y_axis[j]);
            const double err = std::abs(g.at(i, j) - ref);
            worst = std::max(worst, err);
            csv << full(s_axis[i]) << ',' << full(y_axis[j]) << ',' << full(g.at(i, j)) << ',' << full(ref) << ','
                << full(err) << '\n';
        }
    }
    ExperimentResult r{csv.str(), json::object()};
    r.summary["max_abs_discrepancy"] = worst;
    r.summary["t_level"] = g.t_level;
    return r;
}

}  // namespace

std::vector<Table1Row> reproduce_table1(const RunConfig& cfg, const std::vector<double>& times) {
    const PowerBench pb = power_bench(cfg);
    const WealthPoint unit = WealthPoint::split_evenly(1.0, cfg.model.n());
    std::vector<Table1Row> rows;
    for (double t : times) {
        Table1Row row;
        row.t = t;
        row.T = cfg.T;
        row.u_mer_coeff = round_to(pb.c1 * merton_benchmark(pb.alpha, pb.lambda_sq, cfg.T, 1.0), 6);
        row.u_hat_coeff = round_to(u_hat(cfg.model, cfg.utility, t, cfg.T, unit, cfg.y), 6);
        row.abs_error_coeff = round_to(std::abs(row.u_mer_coeff - row.u_hat_coeff), 6);
        rows.push_back(row);
    }
    return rows;
}

std::vector<BenchRow> reproduce_table23(const RunConfig& cfg) {
    const PowerBench pb = power_bench(cfg);
    std::vector<BenchRow> rows;
    for (double s : cfg.wealth_grid) {
        BenchRow row;
        row.s = s;
        row.u_mer = round_to(pb.c1 * merton_benchmark(pb.alpha, pb.lambda_sq, cfg.T, s), 6);
        row.u_hat = round_to(
            u_hat(cfg.model, cfg.utility, cfg.t, cfg.T, WealthPoint::split_evenly(s, cfg.model.n()), cfg.y), 6);
        row.abs_error = round_to(std::abs(row.u_mer - row.u_hat), 6);
        row.pct_error = round_to(row.abs_error / std::abs(row.u_mer) * 100.0, 4);
        rows.push_back(row);
    }
    return rows;
}

std::string table23_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "s,u_mer,u_hat,abs_error,pct_error\n";
    for (const auto& r : rows) {
        os << fmt(r.s, 1) << ',' << fmt(r.u_mer, 6) << ',' << fmt(r.u_hat, 6) << ',' << fmt(r.abs_error, 6) << ','
           << fmt(r.pct_error, 4) << '\n';
    }
    return os.str();
}

std::string table1_csv(const std::vector<Table1Row>& rows) {
    std::ostringstream os;
    os << "t,T,u_mer_coeff,u_hat_coeff,abs_error_coeff\n";
    for (const auto& r : rows) {
        os << fmt(r.t, 2) << ',' << fmt(r.T, 2) << ',' << fmt(r.u_mer_coeff, 6) << ',' << fmt(r.u_hat_coeff, 6)
           << ',' << fmt(r.abs_error_coeff, 6) << '\n';
    }
    return os.str();
}

ExperimentResult execute_experiment(const RunConfig& cfg) {
    check_run_config(cfg);
    require_valid(cfg.model);
    ExperimentResult r;
    switch (cfg.experiment) {
        case Experiment::Table1: r = run_table1(cfg); break;
        case Experiment::Table23: r = run_table23(cfg); break;
        case Experiment::ErrorScaling: r = run_error_scaling(cfg); break;
        case Experiment::Scheme: r = run_scheme(cfg); break;
        case Experiment::PolicyEval: r = run_policy_eval(cfg); break;
    }
    r.summary["experiment"] = to_string(cfg.experiment);
    r.summary["config"] = config_to_json(cfg);
    return r;
}

int run_experiment(const RunConfig& cfg, std::ostream& diag) {
    try {
        const ExperimentResult r = execute_experiment(cfg);
        std::ofstream csv(cfg.output_path + ".csv");
        std::ofstream js(cfg.output_path + ".json");
        if (!csv || !js) {
            diag << "error: cannot write output files at '" << cfg.output_path << "'\n";
            return exit_code::unexpected;
        }
        csv << r.csv;
        js << r.summary.dump(2) << '\n';
        return exit_code::ok;
    } catch (const ConfigError& e) {
        diag << "config error: " << e.what() << '\n';
        return exit_code::config;
    } catch (const ModelError& e) {
        diag << "validation error: " << e.what() << '\n';
        return exit_code::validation;
    } catch (const BudgetError& e) {
        diag << "budget guard: " << e.what() << '\n';
        return exit_code::budget;
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << '\n';
        return exit_code::unexpected;
    }
}

}  // namespace smalltime
