#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "critsing/mountain_pass.hpp"
#include "critsing/singular_solvers.hpp"

namespace critsing {

/// Everything the second-solution run certifies.
struct SecondOutcome {
    CaseVerdict verdict;
    SolveReport v_report;          ///< the translated-problem critical point
    double gamma0 = 0.0;           ///< critical level (MP case)
    double threshold_value = 0.0;
    double margin = 0.0;           ///< threshold - gamma0
    double rho = 0.0;              ///< annulus radius (ZA case)
    Field composed;                ///< u_lambda + v_lambda
    double composed_residual = 0.0;
    BubbleSpec bubble{0.0, {0, 0, 0}, 0.0, 0.0};
    double r0 = 0.0;
    Classification classification;
};

/// Geometric radius grid 2^{-1} .. 2^{-levels} times the first solution's
/// norm, truncated by a sampling scan certifying nonnegativity of I on the
/// ball of each retained radius.
inline std::vector<double> certified_rho_grid(const Objective& obj, const LaplaceOperator& op,
                                              double base_norm, int levels, Rng& rng,
                                              double tol) {
    std::vector<double> grid;
    for (int k = 1; k <= levels; ++k) {
        const double rho = std::ldexp(base_norm, -k);
        bool ok = true;
        for (int s = 0; s < 10 && ok; ++s) {
            Field w = positive_part(probe_direction(op, rng, rho * (0.1 + 0.9 * rng.uniform())));
            ok = obj.value(w) >= -tol;
        }
        if (ok) grid.push_back(rho);
    }
    if (grid.empty())
        throw ClassificationAmbiguous("certified_rho_grid: no radius certified I >= 0");
    return grid;
}

/// Searches the Talenti-path parameters: cutoff radius inside {u_lambda < a},
/// amplitude R0 doubled from 1 until the ray endpoint is negative, and the
/// concentration scale halved from a/4 until the threshold margin is
/// positive.
inline BubbleCheckReport find_bubble_params(const Field& u_lambda, const ProblemSpec& spec,
                                            const Objective& obj, double threshold_value,
                                            double cutoff_radius, BubbleSpec& out_bubble,
                                            double eps_floor) {
    const auto& grid = *u_lambda.grid;
    if (grid.kind == DomainKind::RadialBall && !(u_lambda.v[0] < spec.a))
        throw GeometryError("find_bubble_params: the origin is not inside {u_lambda < a}");
    // shrink the cutoff until its support sits inside Omega_a
    double rc = std::min(cutoff_radius, 0.49);
    for (int shrink = 0; shrink < 20; ++shrink) {
        bool inside = true;
        for (int i = 0; i < u_lambda.size() && inside; ++i) {
            const auto x = grid.node_coords(i);
            double rho2 = 0.0;
            for (int d = 0; d < 3; ++d) rho2 += x[d] * x[d];
            if (rho2 <= rc * rc && !(u_lambda.v[i] < spec.a)) inside = false;
        }
        if (inside) break;
        rc *= 0.5;
    }

    double eps = std::min(0.25 * spec.a, rc);
    MarginViolation last("", 0.0, 0.0);
    for (int halving = 0; halving < 24; ++halving) {
        if (eps < eps_floor) break;
        BubbleSpec bubble{eps, {0.0, 0.0, 0.0}, rc, talenti_normalization(spec.N)};
        try {
            Field U = bubble_field(u_lambda.grid, bubble);
            double r0 = 1.0;
            int guard = 0;
            while (obj.value(scaled(U, r0)) >= 0.0) {
                r0 *= 2.0;
                if (++guard > 60) throw MarginViolation("R0 search failed", 1.0, eps);
            }
            BubbleCheckReport rep = bubble_path_check(u_lambda, spec, obj, bubble, r0,
                                                      threshold_value);
            out_bubble = bubble;
            return rep;
        } catch (const MarginViolation& mv) {
            last = mv;
            eps *= 0.5;
        }
    }
    throw MarginViolation("find_bubble_params: no eps achieved a positive margin; last: " +
                              std::string(last.what()),
                          last.t, last.eps);
}

/// Classification followed by the matching second-solution branch. The
/// ambiguous verdict attempts the mountain-pass branch first, then the
/// zero-altitude branch.
inline SecondOutcome second_solution_pipeline(const Field& u_lambda, const ProblemSpec& spec,
                                              const LaplaceOperator& op, double S,
                                              Rng& rng, const MountainPassOptions& mp = {},
                                              const SolverOptions& opts = {},
                                              double bubble_eps_floor = 0.0,
                                              PathTrace* trace = nullptr) {
    const Objective obj = translated_objective(u_lambda, spec, op);
    const double thr = threshold(spec, S);
    SecondOutcome out;
    out.threshold_value = thr;

    const double base_norm = h10_norm(u_lambda);
    std::vector<double> rho_grid = certified_rho_grid(obj, op, base_norm, mp.rho_levels,
                                                      rng, mp.classify_tol);
    bool force_both = false;
    try {
        out.classification = classify_case(obj, op, rho_grid, rng, mp);
    } catch (const ClassificationAmbiguous&) {
        force_both = true;
        out.classification = {CaseVerdict::MP, rho_grid.front(), 0.0, {}};
    }

    const double eps_floor =
        bubble_eps_floor > 0.0 ? bubble_eps_floor : 1.5 * u_lambda.grid->h;
    auto run_mp = [&]() {
        BubbleCheckReport chk = find_bubble_params(u_lambda, spec, obj, thr,
                                                   mp.bubble_cutoff_radius, out.bubble,
                                                   eps_floor);
        out.r0 = chk.r0;
        Field U = bubble_field(u_lambda.grid, out.bubble);
        PathState path = make_bubble_path(obj, U, mp.path_nodes, chk.r0);
        if (out.classification.rho1 > 0.0 &&
            !(h10_norm(path.nodes.back()) > out.classification.rho1))
            throw DomainError("second_solution_pipeline: path endpoint inside the barrier radius");
        out.v_report = mp_solve(u_lambda, spec, op, path, thr, mp, opts.newton_tol, trace);
        out.gamma0 = out.v_report.energy.total;
        out.margin = thr - out.gamma0;
        out.verdict = CaseVerdict::MP;
    };
    auto run_za = [&]() {
        const double rho = rho_grid.size() > 1 ? rho_grid[1] : 0.5 * rho_grid.front();
        out.rho = rho;
        out.v_report = za_solve(u_lambda, spec, op, rho, rng, mp, opts.newton_tol);
        out.verdict = CaseVerdict::ZA;
    };

    if (out.classification.verdict == CaseVerdict::MP) {
        if (force_both) {
            try {
                run_mp();
            } catch (const Error&) {
                run_za();
            }
        } else {
            run_mp();
        }
    } else {
        run_za();
    }

    out.composed = added(u_lambda, out.v_report.solution);
    Field Au = op.apply(out.composed);
    double res = 0.0;
    for (int i = 0; i < out.composed.size(); ++i)
        res = std::max(res, std::abs(Au.v[i] - rhs_full(out.composed.v[i], spec)));
    out.composed_residual = res;
    return out;
}

}  // namespace critsing
