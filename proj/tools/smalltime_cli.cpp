#include "smalltime/bench.hpp"
#include "smalltime/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> paths;
    std::optional<double> dt;
    std::optional<double> t;
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "JSON run configuration (defaults to the built-in two-asset example)");
    sub->add_option("--out", o.out, "Output prefix; writes <out>.csv and <out>.json");
    sub->add_option("--seed", o.seed, "Simulation seed");
    sub->add_option("--paths", o.paths, "Monte-Carlo path count");
    sub->add_option("--dt", o.dt, "Euler step");
    sub->add_option("--t", o.t, "Evaluation time");
}

int dispatch(smalltime::Experiment e, const Overrides& o) {
    using namespace smalltime;
    RunConfig cfg;
    try {
        cfg = o.config.empty() ? two_asset::run_config(e, 1.5) : load_config(o.config);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return exit_code::config;
    } catch (const std::exception& err) {
        std::cerr << "validation error: " << err.what() << '\n';
        return exit_code::validation;
    }
    cfg.experiment = e;
    if (!o.out.empty()) cfg.output_path = o.out;
    if (o.t) cfg.t = *o.t;
    if (o.seed || o.paths || o.dt) {
        SimConfig sim = cfg.sim.value_or(SimConfig{});
        if (o.seed) sim.seed = *o.seed;
        if (o.paths) sim.n_paths = *o.paths;
        if (o.dt) sim.dt = *o.dt;
        cfg.sim = sim;
    }
    const int code = run_experiment(cfg, std::cerr);
    if (code == exit_code::ok) std::cout << "wrote " << cfg.output_path << ".csv and " << cfg.output_path << ".json\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-time-horizon portfolio optimization benchmarks"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        smalltime::Experiment experiment;
    };
    const Entry entries[] = {
        {"table1", "Coefficient table for the two-asset example", smalltime::Experiment::Table1},
        {"table23", "Benchmark vs first-order values over the wealth grid", smalltime::Experiment::Table23},
        {"error-scaling", "Monte-Carlo error of the first-order approximation vs horizon",
         smalltime::Experiment::ErrorScaling},
        {"scheme", "Backward time-stepping scheme on an (s, y) grid", smalltime::Experiment::Scheme},
        {"policy-eval", "Monte-Carlo value of the close-to-optimal policy", smalltime::Experiment::PolicyEval},
    };

    Overrides overrides;
    int code = 0;
    for (const auto& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        add_common(sub, overrides);
        const auto experiment = e.experiment;
        sub->callback([&code, &overrides, experiment] { code = dispatch(experiment, overrides); });
    }

    CLI11_PARSE(app, argc, argv);
    return code;
}
