#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "critsing/pipeline.hpp"
#include "critsing/singular_solvers.hpp"

namespace critsing {

/// One row of the branch table.
struct BranchPoint {
    double lambda = 0.0;
    bool first_found = false;
    bool second_found = false;
    double norm_inf_first = 0.0;
    double norm_inf_second = 0.0;   ///< sup norm of the composed second solution
    double energy_first = 0.0;
    std::optional<double> gamma0;   ///< absent outside the MP case
    std::string case_label = "none";
    double residual_first = 0.0;
    double residual_second = 0.0;
    std::string error;              ///< per-point failure note, rows never abort the sweep
};

struct NonexistenceBound {
    double K;      ///< inf_{t>0} (t^{2*-1} + chi_{t<a} t^{-delta}) / t
    double bound;  ///< lambda_1 / K, an upper bound for the extremal parameter
};

namespace detail {

template <typename F>
double golden_min(F&& f, double lo, double hi, int iters = 200) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int k = 0; k < iters; ++k) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return f(0.5 * (a + b));
}

}  // namespace detail

/// Superlinearity constant K(a) and the analytic upper bound lambda_1/K for
/// the extremal parameter. The quotient is minimized by golden-section on the
/// smooth piece below a (it is strictly unimodal there) and compared with the
/// endpoint value of the jump-free piece at t = a.
inline NonexistenceBound nonexistence_bound(const ProblemSpec& spec, double lambda1) {
    const double p = spec.two_star() - 2.0;
    const double q = 1.0 + spec.delta;
    auto quotient_below = [&](double t) { return std::pow(t, p) + std::pow(t, -q); };
    // interior minimum of the full quotient, valid while it lies below a
    const double t_star = std::pow(q / p, 1.0 / (p + q));
    double k_below;
    if (t_star < spec.a) {
        const double lo = 0.5 * t_star, hi = std::min(2.0 * t_star, spec.a);
        k_below = detail::golden_min(quotient_below, lo, hi);
    } else {
        k_below = quotient_below(spec.a);  // decreasing up to a; infimum at the endpoint
    }
    const double k_above = std::pow(spec.a, p);  // t^{2*-2} increasing on [a, inf)
    NonexistenceBound out;
    out.K = std::min(k_below, k_above);
    out.bound = lambda1 / out.K;
    return out;
}

struct LambdaMaxEstimate {
    double lo = 0.0;   ///< largest certified-success lambda
    double hi = 0.0;   ///< smallest certified-failure lambda (or the analytic bound)
    double analytic_bound = 0.0;
    bool inconsistent = false;  ///< a success was observed above a failure
    std::vector<std::pair<double, bool>> probes;  ///< (lambda, success)
};

/// Bisection on first-solution success against the numerically observed
/// solvability frontier, started from the analytic nonexistence bound.
/// Nonmonotone solver behavior is recorded and the conservative envelope
/// returned; the estimate never exceeds the analytic bound.
inline LambdaMaxEstimate estimate_lambda_max(const ProblemSpec& spec_family,
                                             const LaplaceOperator& op, const EigenPair& eig,
                                             double tol, const SolverOptions& opts = {}) {
    if (!(tol > 0.0)) throw DomainError("estimate_lambda_max: tol must be positive");
    LambdaMaxEstimate est;
    est.analytic_bound = nonexistence_bound(spec_family, eig.lambda1).bound;
    double hi = est.analytic_bound;
    double lo = 0.0;
    std::optional<Field> warm;
    double warm_lambda = 0.0;

    auto attempt = [&](double lam) {
        ProblemSpec s = spec_family.with_lambda(lam);
        std::optional<Field> start;
        if (warm) {
            Field w = *warm;
            const double scale = std::pow(lam / warm_lambda, 1.0 / (1.0 + s.delta));
            for (double& x : w.v) x *= scale;
            start = std::move(w);
        }
        try {
            SolveReport rep = first_solution(s, op, eig, opts, start ? &*start : nullptr);
            est.probes.emplace_back(lam, rep.converged);
            if (!rep.converged) return false;
            warm = rep.solution;
            warm_lambda = lam;
            return true;
        } catch (const Error&) {
            est.probes.emplace_back(lam, false);
            return false;
        }
    };

    // find any solvable lambda below the bound
    double probe = 0.5 * hi;
    int guard = 0;
    while (!attempt(probe)) {
        hi = probe;
        probe *= 0.5;
        if (++guard > 50)
            throw ConvergenceError("estimate_lambda_max: no solvable lambda found");
    }
    lo = probe;

    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (attempt(mid)) lo = mid; else hi = mid;
    }

    // conservative envelope against nonmonotone outcomes
    double min_fail = est.analytic_bound;
    for (const auto& [lam, ok] : est.probes)
        if (!ok) min_fail = std::min(min_fail, lam);
    double max_success_below = 0.0;
    for (const auto& [lam, ok] : est.probes) {
        if (ok && lam > min_fail) est.inconsistent = true;
        if (ok && lam <= min_fail) max_success_below = std::max(max_success_below, lam);
    }
    est.lo = est.inconsistent ? max_success_below : lo;
    est.hi = std::min(hi, est.analytic_bound);
    return est;
}

/// Branch sweep: the first solution and the second-solution pipeline at each
/// lambda, warm-starting from the previous point through the pure-singular
/// scaling. Failures are recorded in the row.
inline std::vector<BranchPoint> sweep(const ProblemSpec& spec_family,
                                      const std::vector<double>& lambdas,
                                      const LaplaceOperator& op, const EigenPair& eig,
                                      double S, Rng& rng, const SolverOptions& opts = {},
                                      const MountainPassOptions& mp = {}) {
    std::vector<BranchPoint> table;
    std::optional<Field> warm;
    double warm_lambda = 0.0;
    for (double lam : lambdas) {
        BranchPoint row;
        row.lambda = lam;
        ProblemSpec s = spec_family.with_lambda(lam);
        try {
            std::optional<Field> start;
            if (warm) {
                Field w = *warm;
                const double scale = std::pow(lam / warm_lambda, 1.0 / (1.0 + s.delta));
                for (double& x : w.v) x *= scale;
                start = std::move(w);
            }
            SolveReport first = first_solution(s, op, eig, opts, start ? &*start : nullptr);
            row.first_found = first.converged;
            row.norm_inf_first = norm_inf(first.solution);
            row.energy_first = first.energy.total;
            row.residual_first = first.residual_inf;
            warm = first.solution;
            warm_lambda = lam;
            try {
                SecondOutcome second =
                    second_solution_pipeline(first.solution, s, op, S, rng, mp, opts);
                row.second_found = second.v_report.converged;
                row.norm_inf_second = norm_inf(second.composed);
                row.case_label = to_string(second.verdict);
                if (second.verdict == CaseVerdict::MP) row.gamma0 = second.gamma0;
                row.residual_second = second.composed_residual;
            } catch (const Error& e) {
                row.error = e.what();
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace critsing
