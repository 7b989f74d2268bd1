#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "critsing/config.hpp"
#include "critsing/continuation.hpp"
#include "critsing/io.hpp"
#include "critsing/pipeline.hpp"

namespace critsing {

/// Process exit codes shared by all subcommands.
enum ExitCode : int {
    exit_ok = 0,
    exit_error = 1,
    exit_no_solution = 2,
    exit_threshold_stall = 3,
};

/// Grid, operator and eigenpair assembled once per run.
struct RunContext {
    std::shared_ptr<const Grid> grid;
    std::unique_ptr<LaplaceOperator> op;
    EigenPair eig;

    explicit RunContext(const RunConfig& cfg) {
        grid = cfg.grid_kind == DomainKind::RadialBall
                   ? Grid::radial(cfg.problem.N, cfg.grid_M)
                   : Grid::box3d(cfg.grid_M);
        op = std::make_unique<LaplaceOperator>(grid);
        eig = eigen_first(*op, cfg.solver.e1_sup);
    }
};

inline ProblemSpec spec_of(const RunConfig& cfg) {
    ProblemSpec s = cfg.problem;
    s.domain = cfg.grid_kind;
    return s;
}

inline std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// First solution: writes report.json and solution.csv.
inline int run_solve(const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        if (!cfg.has_lambda) throw ConfigError("solve: a single problem.lambda is required");
        const auto dir = ensure_out_dir(cfg);
        RunContext ctx(cfg);
        const ProblemSpec spec = spec_of(cfg);
        SolveReport rep = first_solution(spec, *ctx.op, ctx.eig, cfg.solver);
        const std::string csv = (dir / "solution.csv").string();
        write_field_csv(csv, rep.solution, cfg.config_hash);
        write_json((dir / "report.json").string(), report_json(rep, spec, csv, cfg.config_hash));
        return rep.converged ? exit_ok : exit_no_solution;
    } catch (const NoSolutionEvidence& e) {
        err << "no-solution evidence: " << e.what() << "\n";
        return exit_no_solution;
    } catch (const ScheduleExhaustedError& e) {
        err << "no-solution evidence: " << e.what() << "\n";
        return exit_no_solution;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

/// Classification, second solution and the gamma0 certificate: writes
/// certificate.json, v_lambda.csv, u_plus_v.csv and path_trace.csv.
inline int run_second(const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        if (!cfg.has_lambda) throw ConfigError("second: a single problem.lambda is required");
        const auto dir = ensure_out_dir(cfg);
        RunContext ctx(cfg);
        const ProblemSpec spec = spec_of(cfg);
        SolveReport first = first_solution(spec, *ctx.op, ctx.eig, cfg.solver);
        Rng rng(cfg.seed);
        const SobolevConstants sob = sobolev_constants(spec.N);
        PathTrace trace;
        SecondOutcome second =
            second_solution_pipeline(first.solution, spec, *ctx.op, sob.S, rng, cfg.mp,
                                     cfg.solver, cfg.bubble_eps_floor, &trace);
        write_field_csv((dir / "v_lambda.csv").string(), second.v_report.solution,
                        cfg.config_hash);
        write_field_csv((dir / "u_plus_v.csv").string(), second.composed, cfg.config_hash);
        write_path_trace_csv((dir / "path_trace.csv").string(), trace, cfg.config_hash);
        ordered_json cert;
        cert["config_hash"] = cfg.config_hash;
        cert["case"] = to_string(second.verdict);
        if (second.verdict == CaseVerdict::MP) {
            cert["gamma0"] = second.gamma0;
            cert["threshold"] = second.threshold_value;
            cert["margin"] = second.margin;
        } else {
            cert["threshold"] = second.threshold_value;
            cert["rho"] = second.rho;
            cert["norm_lower_bound"] = second.rho / 2.0;
        }
        cert["residual"] = second.v_report.residual_inf;
        cert["composed_residual"] = second.composed_residual;
        cert["norm_inf_v"] = norm_inf(second.v_report.solution);
        cert["sobolev_S"] = sob.S;
        write_json((dir / "certificate.json").string(), cert);
        return exit_ok;
    } catch (const StallAboveThreshold& e) {
        err << "threshold stall: " << e.what() << "\n";
        return exit_threshold_stall;
    } catch (const NoSolutionEvidence& e) {
        err << "no-solution evidence: " << e.what() << "\n";
        return exit_no_solution;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

/// Branch sweep over problem.lambdas: writes branch.csv.
inline int run_sweep(const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        if (cfg.lambdas.empty())
            throw ConfigError("sweep: problem.lambdas list is required");
        for (std::size_t i = 1; i < cfg.lambdas.size(); ++i)
            if (!(cfg.lambdas[i] > cfg.lambdas[i - 1]))
                throw ConfigError("sweep: lambdas must be sorted ascending");
        const auto dir = ensure_out_dir(cfg);
        RunContext ctx(cfg);
        Rng rng(cfg.seed);
        const SobolevConstants sob = sobolev_constants(cfg.problem.N);
        std::vector<BranchPoint> rows = sweep(spec_of(cfg), cfg.lambdas, *ctx.op, ctx.eig,
                                              sob.S, rng, cfg.solver, cfg.mp);
        write_branch_csv((dir / "branch.csv").string(), rows, cfg.config_hash);
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

/// Bisection estimate of the solvability frontier: writes lambda_max.json.
inline int run_lambda_max(const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        const auto dir = ensure_out_dir(cfg);
        RunContext ctx(cfg);
        LambdaMaxEstimate est = estimate_lambda_max(spec_of(cfg), *ctx.op, ctx.eig,
                                                    cfg.lambda_max_tol, cfg.solver);
        ordered_json j;
        j["config_hash"] = cfg.config_hash;
        j["lo"] = est.lo;
        j["hi"] = est.hi;
        j["analytic_bound"] = est.analytic_bound;
        j["lambda1"] = ctx.eig.lambda1;
        j["inconsistent"] = est.inconsistent;
        ordered_json probes = ordered_json::array();
        for (const auto& [lam, ok] : est.probes)
            probes.push_back(ordered_json{{"lambda", lam}, {"success", ok}});
        j["probes"] = probes;
        write_json((dir / "lambda_max.json").string(), j);
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

/// Re-audit of a first solution: weak-form residuals, bracket certificate,
/// level-set fraction and the local-minimum probe. Writes verify.json.
inline int run_verify(const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        if (!cfg.has_lambda) throw ConfigError("verify: a single problem.lambda is required");
        const auto dir = ensure_out_dir(cfg);
        RunContext ctx(cfg);
        const ProblemSpec spec = spec_of(cfg);
        SolveReport rep = first_solution(spec, *ctx.op, ctx.eig, cfg.solver);
        Rng rng(cfg.seed);
        WeakFormAudit audit = audit_weak_form(rep.solution, spec, *ctx.op,
                                              cfg.n_test_fields, rng);
        ordered_json j;
        j["config_hash"] = cfg.config_hash;
        j["residual_inf"] = rep.residual_inf;
        j["weak_residual_max"] = audit.max_rel_residual;
        j["n_test_fields"] = audit.n_tests;
        j["levelset_fraction"] = audit.levelset_fraction;
        // bracket certificate from the explicit construction, when available
        bool bracket_certified = false;
        bool monotone_certified = false;
        try {
            SolveReport pure = solve_pure_singular(spec, *ctx.op, ctx.eig, cfg.solver);
            Field upper = build_supersolution(spec, *ctx.op, pure.solution);
            Bracket bracket{pure.solution, upper};
            bracket.validate();
            bracket_certified = true;
            SolveReport mono = monotone_iterate(spec, *ctx.op, bracket, cfg.solver);
            monotone_certified = mono.monotonicity_certificate;
        } catch (const Error&) {
        }
        j["bracket_certified"] = bracket_certified;
        j["monotonicity_certificate"] = monotone_certified;
        ProbeReport probe = local_min_probe(rep.solution, spec, *ctx.op, cfg.probe_count,
                                            cfg.probe_radius, rng);
        j["probe"] = ordered_json{{"n_probes", probe.n_probes},
                                  {"radius", probe.radius},
                                  {"min_gap", probe.min_gap},
                                  {"violations", probe.violations}};
        write_json((dir / "verify.json").string(), j);
        return exit_ok;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

/// Talenti-path margin scan over the eps schedule: writes bubble_margin.csv.
inline int run_bubble_check(const RunConfig& cfg, std::ostream& err = std::cerr) {
    try {
        if (!cfg.has_lambda)
            throw ConfigError("bubble-check: a single problem.lambda is required");
        const auto dir = ensure_out_dir(cfg);
        RunContext ctx(cfg);
        const ProblemSpec spec = spec_of(cfg);
        SolveReport first = first_solution(spec, *ctx.op, ctx.eig, cfg.solver);
        const SobolevConstants sob = sobolev_constants(spec.N);
        const double thr = threshold(spec, sob.S);
        const Objective obj = translated_objective(first.solution, spec, *ctx.op);
        const double eps_floor =
            cfg.bubble_eps_floor > 0.0 ? cfg.bubble_eps_floor : 1.5 * ctx.grid->h;

        std::ofstream csv(dir / "bubble_margin.csv");
        csv << "# config_hash=" << cfg.config_hash << "\n";
        csv << "eps,r0,margin,max_ray_value,worst_large_R,status\n";
        bool any_positive = false;
        double eps = std::min(0.25 * spec.a, cfg.mp.bubble_cutoff_radius);
        for (; eps >= eps_floor; eps *= 0.5) {
            BubbleSpec bubble{eps, {0, 0, 0}, cfg.mp.bubble_cutoff_radius,
                              talenti_normalization(spec.N)};
            try {
                Field U = bubble_field(ctx.grid, bubble);
                double r0 = 1.0;
                while (obj.value(scaled(U, r0)) >= 0.0 && r0 < 1e18) r0 *= 2.0;
                BubbleCheckReport rep = bubble_path_check(first.solution, spec, obj, bubble,
                                                          r0, thr);
                csv << fmt17(eps) << "," << fmt17(rep.r0) << "," << fmt17(rep.margin) << ","
                    << fmt17(rep.max_ray_value) << "," << fmt17(rep.worst_large_R) << ",ok\n";
                any_positive = true;
            } catch (const MarginViolation& mv) {
                csv << fmt17(eps) << ",,,,," << "violation\n";
                (void)mv;
            } catch (const GeometryError&) {
                csv << fmt17(eps) << ",,,,," << "geometry\n";
            }
        }
        return any_positive ? exit_ok : exit_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

}  // namespace critsing
