#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "lagflow/io.hpp"
#include "lagflow/scenario.hpp"

namespace {

struct CommonArgs {
    std::string scenario;
    std::string out = ".";
    int threads = 1;
    std::optional<std::uint64_t> seed;
    bool out_set = false;
    bool threads_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario, "scenario file (json)")->required();
    cmd->add_option("--out", args.out, "output directory")->each([&](const std::string&) {
        args.out_set = true;
    });
    cmd->add_option("--threads", args.threads, "worker thread count")->each([&](const std::string&) {
        args.threads_set = true;
    });
    cmd->add_option("--seed", [&args](const std::vector<std::string>& v) {
        args.seed = std::stoull(v.front());
        return true;
    }, "override the scenario RNG seed");
}

void apply_env(CommonArgs& args) {
    if (!args.out_set) {
        if (const char* env = std::getenv("LAGFLOW_OUT")) args.out = env;
    }
    if (!args.threads_set) {
        if (const char* env = std::getenv("LAGFLOW_THREADS")) args.threads = std::atoi(env);
    }
}

std::string scenario_module(const std::string& path) {
    std::ifstream is(path);
    if (!is) return "";
    try {
        const nlohmann::json j = nlohmann::json::parse(is);
        return j.value("module", "");
    } catch (...) {
        return "";
    }
}

int run(const CommonArgs& args, const std::vector<std::string>& allowed_modules) {
    const std::string module = scenario_module(args.scenario);
    if (!allowed_modules.empty()) {
        bool ok = false;
        for (const auto& m : allowed_modules)
            if (m == module) ok = true;
        if (!ok) {
            std::cerr << "config error: scenario module '" << module
                      << "' does not match this subcommand\n";
            return 2;
        }
    }
    lagflow::RunOptions opts;
    opts.out_dir = args.out;
    opts.threads = args.threads;
    opts.seed_override = args.seed;
    const lagflow::RunResult res = lagflow::run_scenario(args.scenario, opts);
    std::cout << res.summary;
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lagflow - Lagrangian continuum mechanics laboratory"};
    app.require_subcommand(1);

    CommonArgs sim_args, c2_args, plasma_args, static_args, bound_args;

    CLI::App* simulate = app.add_subcommand("simulate", "run a fluid or gravity scenario");
    add_common(simulate, sim_args);

    CLI::App* c2 = app.add_subcommand("c2", "run a complex-doublet scenario");
    add_common(c2, c2_args);

    CLI::App* plasma = app.add_subcommand("plasma", "run a two-species electrostatic scenario");
    add_common(plasma, plasma_args);

    CLI::App* static_solve = app.add_subcommand("static-solve", "rotating-column profile solve");
    add_common(static_solve, static_args);

    CLI::App* bound_check = app.add_subcommand("bound-check", "energy-bound trial sweep");
    add_common(bound_check, bound_args);

    std::string diag_in, diag_out = "plotdata.csv", diag_columns;
    double diag_scale = 1.0;
    CLI::App* diagnose = app.add_subcommand("diagnose", "reshape diagnostics for plotting");
    diagnose->add_option("--input", diag_in, "diagnostics csv")->required();
    diagnose->add_option("--out", diag_out, "output csv");
    diagnose->add_option("--scale", diag_scale, "value scale factor (recorded in header)");
    diagnose->add_option("--columns", diag_columns, "comma-separated column subset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            apply_env(sim_args);
            return run(sim_args, {"fluid", "gravity"});
        }
        if (c2->parsed()) {
            apply_env(c2_args);
            return run(c2_args, {"c2"});
        }
        if (plasma->parsed()) {
            apply_env(plasma_args);
            return run(plasma_args, {"plasma"});
        }
        if (static_solve->parsed()) {
            apply_env(static_args);
            return run(static_args, {"static-solve"});
        }
        if (bound_check->parsed()) {
            apply_env(bound_args);
            return run(bound_args, {"bound-check"});
        }
        if (diagnose->parsed()) {
            std::vector<std::string> cols;
            if (!diag_columns.empty()) {
                std::stringstream ss(diag_columns);
                std::string tok;
                while (std::getline(ss, tok, ',')) cols.push_back(tok);
            }
            lagflow::emit_plotdata(diag_in, diag_out, diag_scale, cols);
            return 0;
        }
    } catch (const lagflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const lagflow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
