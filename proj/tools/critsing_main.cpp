// Command-line front end: solve | second | sweep | lambda-max | verify |
// bubble-check, driven by a declarative config file (block text or JSON).
// Exit codes: 0 ok, 1 error, 2 no-solution-evidence, 3 threshold-stall.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "critsing/config.hpp"
#include "critsing/runner.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    int grid_size = 0;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "configuration file (text or JSON)")
        ->required();
    cmd->add_option("--out", f.out_dir, "output directory (overrides output.dir)");
    cmd->add_option("--seed", f.seed, "RNG seed (overrides solver.seed)");
    cmd->add_option("--grid-size", f.grid_size, "grid size M (overrides grid.M)");
    cmd->add_flag("--quiet", f.quiet, "suppress progress output");
}

int load_and_run(const CommonFlags& f, int (*runner)(const critsing::RunConfig&, std::ostream&)) {
    try {
        critsing::RunConfig cfg = critsing::load_config(f.config_path);
        if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
        if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
        if (f.grid_size > 0) cfg.grid_M = f.grid_size;
        if (f.quiet) cfg.quiet = true;
        return runner(cfg, std::cerr);
    } catch (const critsing::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return critsing::exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return critsing::exit_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critsing: two-solution solver for the critical singular jump problem"};
    app.require_subcommand(1);

    CommonFlags f_solve, f_second, f_sweep, f_lmax, f_verify, f_bubble;
    auto* c_solve = app.add_subcommand("solve", "first (minimal-branch) solution");
    auto* c_second = app.add_subcommand("second", "second solution and gamma0 certificate");
    auto* c_sweep = app.add_subcommand("sweep", "branch table over a lambda list");
    auto* c_lmax = app.add_subcommand("lambda-max", "bisection of the solvability frontier");
    auto* c_verify = app.add_subcommand("verify", "re-audit a first solution");
    auto* c_bubble = app.add_subcommand("bubble-check", "Talenti-path margin scan");
    add_common(c_solve, f_solve);
    add_common(c_second, f_second);
    add_common(c_sweep, f_sweep);
    add_common(c_lmax, f_lmax);
    add_common(c_verify, f_verify);
    add_common(c_bubble, f_bubble);

    CLI11_PARSE(app, argc, argv);

    if (c_solve->parsed()) return load_and_run(f_solve, critsing::run_solve);
    if (c_second->parsed()) return load_and_run(f_second, critsing::run_second);
    if (c_sweep->parsed()) return load_and_run(f_sweep, critsing::run_sweep);
    if (c_lmax->parsed()) return load_and_run(f_lmax, critsing::run_lambda_max);
    if (c_verify->parsed()) return load_and_run(f_verify, critsing::run_verify);
    if (c_bubble->parsed()) return load_and_run(f_bubble, critsing::run_bubble_check);
    return critsing::exit_error;
}
