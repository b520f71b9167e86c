// Batch front end: solve/sweep, bounds tables, verification suites and mesh
// dumps for the periodic grating solver. Exit codes: 0 success, 1 usage or
// configuration error, 2 verification failure, 3 solver failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "grating/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides; // key=value
};

grating::RunConfig load_config(const CommonOpts& opts) {
    grating::RunConfig config;
    if (!opts.config_path.empty()) config = grating::parse_config_file(opts.config_path);
    for (const auto& kv : opts.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override '" + kv + "' is not key=value");
        grating::apply_config_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    grating::validate_config(config);
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "config file (key = value lines)");
    cmd->add_option("--set", opts.overrides, "override, e.g. --set k=1.5 (repeatable)");
    // frequent overrides as first-class flags
    static const char* keys[] = {"profile", "bc",         "k",      "theta_deg", "gamma",
                                 "lambda",  "k_minus",    "R",      "f_minus",   "f_plus",
                                 "mesh_h",  "fe_order",   "dtn_N",  "refinements",
                                 "seed",    "output",     "n_samples"};
    for (const char* key : keys) {
        cmd->add_option_function<std::string>(
            std::string("--") + key,
            [&opts, key](const std::string& value) {
                opts.overrides.push_back(std::string(key) + "=" + value);
            },
            std::string("config key ") + key);
    }
}

std::ostream& open_output(const grating::RunConfig& config, std::ofstream& file) {
    if (config.output.empty()) return std::cout;
    file.open(config.output);
    if (!file) throw std::invalid_argument("cannot open output '" + config.output + "'");
    return file;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grating-bench: quasi-periodic grating diffraction solver and verifier"};
    app.require_subcommand(1);

    CommonOpts solve_opts, sweep_opts, bounds_opts, verify_opts, mesh_opts;
    auto* solve_cmd = app.add_subcommand("solve", "solve and emit one CSV row per (k, theta)");
    add_common(solve_cmd, solve_opts);
    auto* sweep_cmd = app.add_subcommand("sweep", "alias of solve for list-valued k/theta");
    add_common(sweep_cmd, sweep_opts);
    auto* bounds_cmd = app.add_subcommand("bounds", "stability-constant table, no solving");
    add_common(bounds_cmd, bounds_opts);

    std::string suite = "all";
    bool inject_failure = false;
    auto* verify_cmd = app.add_subcommand("verify", "oracle/identity/inequality check suites");
    add_common(verify_cmd, verify_opts);
    verify_cmd->add_option("suite", suite, "oracles | identities | inequalities | all")
        ->default_val("all");
    verify_cmd->add_flag("--inject-failure", inject_failure,
                         "perturb one oracle as a negative control");

    auto* mesh_cmd = app.add_subcommand("mesh-dump", "generate the mesh and dump it as text");
    add_common(mesh_cmd, mesh_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve_cmd->parsed() || sweep_cmd->parsed()) {
            grating::RunConfig config = load_config(solve_cmd->parsed() ? solve_opts : sweep_opts);
            auto rows = grating::run_sweep(config);
            std::ofstream file;
            grating::write_solve_csv(open_output(config, file), config, rows);
            for (const auto& row : rows)
                if (row.status != "ok") return 3;
            return 0;
        }
        if (bounds_cmd->parsed()) {
            grating::RunConfig config = load_config(bounds_opts);
            std::ofstream file;
            grating::write_bounds_csv(open_output(config, file), config);
            return 0;
        }
        if (verify_cmd->parsed()) {
            grating::RunConfig config = load_config(verify_opts);
            std::ofstream file;
            int failures = grating::run_verify(open_output(config, file), config, suite,
                                               inject_failure);
            if (failures > 0) {
                std::cerr << failures << " verification check(s) failed\n";
                return 2;
            }
            return 0;
        }
        if (mesh_cmd->parsed()) {
            grating::RunConfig config = load_config(mesh_opts);
            grating::GeometryBundle geom = grating::prepare_geometry(config);
            std::ofstream file;
            grating::write_mesh_dump(*geom.meshes.back(), open_output(config, file));
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
