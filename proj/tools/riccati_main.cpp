// Command-line driver: `run` executes one configuration, `sweep` repeats it
// over a list of parameter values. Exit codes are listed in runner.hpp.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "riccati/run_config.hpp"
#include "riccati/runner.hpp"

namespace {

struct Options {
    std::string config;
    std::string model;
    std::string out_dir;
    bool oracle = false;
    bool general_path = false;
    std::optional<double> t;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "JSON run configuration");
    cmd->add_option("--model", o.model, "model preset: matrix, conv, corr or burgers");
    cmd->add_option("--out-dir", o.out_dir, "output directory (overrides the config)");
    cmd->add_flag("--oracle", o.oracle, "also run the direct integrator and report the error");
    cmd->add_flag("--general-path", o.general_path, "time-step the linear flows instead of the closed form");
    cmd->add_option("--t", o.t, "evaluation time (sets t_final and the query list)");
    cmd->add_option("--seed", o.seed, "seed for random blocks (matrix model)");
}

riccati::RunConfig resolve(const Options& o) {
    using namespace riccati;
    RunConfig cfg;
    if (!o.config.empty()) {
        cfg = load_config(o.config);
        if (!o.model.empty() && parse_model_kind(o.model) != cfg.model) {
            throw ConfigError("--model " + o.model + " does not match the config model '" +
                              to_string(cfg.model) + "'");
        }
    } else if (!o.model.empty()) {
        cfg = preset(parse_model_kind(o.model));
    } else {
        throw ConfigError("either --config or --model is required");
    }
    if (o.oracle) {
        cfg.toggles.oracle = true;
    }
    if (o.general_path) {
        cfg.toggles.general_path = true;
    }
    if (o.t) {
        set_parameter(cfg, "t", *o.t);
    }
    if (o.seed) {
        if (cfg.model != ModelKind::Matrix) {
            throw ConfigError("--seed only applies to the matrix model");
        }
        cfg.blocks.seed = *o.seed;
    }
    if (!o.out_dir.empty()) {
        cfg.output_dir = o.out_dir;
    }
    validate(cfg);
    return cfg;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw riccati::ConfigError("sweep value '" + item + "' is not a number");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos) {
            throw riccati::ConfigError("sweep value '" + item + "' is not a number");
        }
        values.push_back(v);
    }
    return values;
}

void apply_thread_cap() {
    if (const char* env = std::getenv("RICCATI_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            omp_set_num_threads(n);
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"Riccati construction for nonlocal nonlinear PDEs"};
    app.require_subcommand(1);

    Options run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "run one configuration");
    add_common(run_cmd, run_opts);

    Options sweep_opts;
    std::string param;
    std::string values_text;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a configuration over parameter values");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--param", param, "dotted parameter path, or t / dt")->required();
    sweep_cmd->add_option("--values", values_text, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : riccati::kExitConfig;
    }

    try {
        if (*run_cmd) {
            const riccati::RunConfig cfg = resolve(run_opts);
            return riccati::run(cfg, std::cout).exit_code;
        }
        const riccati::RunConfig cfg = resolve(sweep_opts);
        const std::vector<double> values = parse_values(values_text);
        const std::string out = sweep_opts.out_dir.empty() ? cfg.output_dir : sweep_opts.out_dir;
        return riccati::sweep(cfg, param, values, out, std::cout);
    } catch (const riccati::InvalidInput& e) {
        std::cerr << "config invalid: " << e.what() << "\n";
        return riccati::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
