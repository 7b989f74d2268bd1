#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "critsing/energy.hpp"
#include "critsing/grid.hpp"
#include "critsing/nonlinearity.hpp"
#include "critsing/operators.hpp"
#include "critsing/quadrature.hpp"
#include "critsing/sampling.hpp"
#include "critsing/singular_solvers.hpp"

namespace critsing {

struct MountainPassOptions {
    int path_nodes = 33;
    double stall_tol = 1e-8;        ///< relative peak decrease declaring a stall
    int max_sweeps = 600;
    int polish_every = 10;          ///< attempt a Newton polish each this many sweeps
    double residual_tol = 1e-6;     ///< acceptance residual of the polished point
    double distinct_tol = 1e-4;     ///< sup-norm lower bound certifying nontriviality
    double classify_tol = 1e-8;     ///< sphere-infimum threshold of the MP verdict
    int classify_starts = 10;
    int rho_levels = 10;
    int descent_max_iter = 200;
    double bubble_cutoff_radius = 0.25;
    double step_fraction = 0.3;     ///< initial descent step, relative to the node norm
};

/// Whole-space integrals of the normalized bubble and the Sobolev constant:
///   A = int |V_1|^{2*},  B = int |grad V_1|^2,  S = B / A^{2/2*}.
struct SobolevConstants {
    double A;
    double B;
    double S;
};

namespace detail {

template <typename F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol || depth <= 0) return left + right + err / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace detail

/// Radial quadrature of the bubble integrals over R^N with the r = tan(theta)
/// substitution compressing the tail. Relative accuracy well below 1e-8.
inline SobolevConstants sobolev_constants(int N) {
    if (N < 3 || N > 8) throw DomainError("sobolev_constants: N must lie in [3,8]");
    const double cn = talenti_normalization(N);
    const double ts = 2.0 * N / (N - 2.0);
    const double omega = sphere_surface_area(N);
    auto V = [&](double r) { return cn / std::pow(1.0 + r * r, (N - 2) / 2.0); };
    auto dV = [&](double r) { return -cn * (N - 2) * r / std::pow(1.0 + r * r, N / 2.0); };
    const double top = M_PI / 2.0 - 1e-12;
    auto fA = [&](double th) {
        const double r = std::tan(th);
        const double jac = 1.0 + r * r;
        return std::pow(V(r), ts) * std::pow(r, N - 1) * jac;
    };
    auto fB = [&](double th) {
        const double r = std::tan(th);
        const double jac = 1.0 + r * r;
        const double g = dV(r);
        return g * g * std::pow(r, N - 1) * jac;
    };
    SobolevConstants c{};
    c.A = omega * detail::integrate_adaptive(fA, 0.0, top, 1e-13);
    c.B = omega * detail::integrate_adaptive(fB, 0.0, top, 1e-13);
    if (!(c.A > 0.0) || !(c.B > 0.0) || !std::isfinite(c.A) || !std::isfinite(c.B))
        throw QuadratureError("sobolev_constants: quadrature failed");
    c.S = c.B / std::pow(c.A, 2.0 / ts);
    return c;
}

/// Compactness threshold S^{N/2} / (N lambda^{(N-2)/2}).
inline double threshold(const ProblemSpec& spec, double S) {
    return std::pow(S, spec.N / 2.0) / (spec.N * std::pow(spec.lambda, (spec.N - 2) / 2.0));
}

/// A functional on fields together with its H^1_0 Riesz gradient; the path
/// and sphere machinery is generic over this so test harnesses can swap in
/// functionals with known landscapes.
struct Objective {
    std::function<double(const Field&)> value;
    std::function<Field(const Field&)> gradient;
};

namespace detail {

// nodewise translated reaction, a.e. formula with the strict indicator
inline std::vector<double> translated_rhs(const Field& v, const Field& ul,
                                          const ProblemSpec& spec) {
    std::vector<double> n(v.size());
    for (int i = 0; i < v.size(); ++i) {
        const TranslatedTerms t = translated_terms(v.v[i], ul.v[i], spec);
        n[i] = spec.lambda * (t.g + t.f);
    }
    return n;
}

}  // namespace detail

/// Energy and H^1 gradient of the translated problem around a first solution.
inline Objective translated_objective(const Field& u_lambda, const ProblemSpec& spec,
                                      const LaplaceOperator& op) {
    Objective obj;
    obj.value = [&u_lambda, spec](const Field& v) {
        return energy_I(v, u_lambda, spec).total;
    };
    obj.gradient = [&u_lambda, spec, &op](const Field& v) {
        Field f(v.grid);
        f.v = detail::translated_rhs(v, u_lambda, spec);
        Field g = v;
        axpy(g, -1.0, op.solve(f));
        return g;
    };
    return obj;
}

/// Calibration harness: the smooth pure-critical functional
///   J(u) = 1/2 ||grad u||^2 - (lambda/2*) ||u||_{2*}^{2*},
/// whose mountain-pass level is S^{N/2}/(N lambda^{(N-2)/2}).
inline Objective pure_critical_objective(const ProblemSpec& spec, const LaplaceOperator& op) {
    Objective obj;
    const double ts = spec.two_star();
    obj.value = [spec, ts](const Field& u) {
        return 0.5 * h10_inner(u, u) -
               spec.lambda / ts * integrate_pointwise(u, [&](double t) {
                   return std::pow(std::abs(t), ts);
               });
    };
    obj.gradient = [spec, ts, &op](const Field& u) {
        Field f(u.grid);
        for (int i = 0; i < u.size(); ++i)
            f.v[i] = spec.lambda * std::pow(std::abs(u.v[i]), ts - 2.0) * u.v[i];
        Field g = u;
        axpy(g, -1.0, op.solve(f));
        return g;
    };
    return obj;
}

/// Projected descent estimate of inf { J(u) : ||u|| = rho, u in H+ } from
/// random nonnegative starts.
inline double sphere_infimum(const Objective& obj, const LaplaceOperator& op, double rho,
                             int n_starts, Rng& rng, const MountainPassOptions& mp = {}) {
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_starts; ++s) {
        Field u;
        double nrm = 0.0;
        do {
            u = positive_part(smoothed_noise(op, rng));
            nrm = h10_norm(u);
        } while (!(nrm > 0.0));
        for (double& x : u.v) x *= rho / nrm;
        double val = obj.value(u);
        for (int it = 0; it < mp.descent_max_iter; ++it) {
            Field g = obj.gradient(u);
            const double gn = h10_norm(g);
            if (!(gn > 0.0)) break;
            double tau = mp.step_fraction * rho / gn;
            bool accepted = false;
            for (int k = 0; k < 40 && !accepted; ++k, tau *= 0.5) {
                Field cand = u;
                axpy(cand, -tau, g);
                cand = positive_part(cand);
                const double cn = h10_norm(cand);
                if (!(cn > 0.0)) continue;
                for (double& x : cand.v) x *= rho / cn;
                const double cv = obj.value(cand);
                if (cv < val - 1e-15 * (1.0 + std::abs(val))) {
                    u = std::move(cand);
                    val = cv;
                    accepted = true;
                }
            }
            if (!accepted) break;
        }
        best = std::min(best, val);
    }
    return best;
}

enum class CaseVerdict { ZA, MP };

inline std::string to_string(CaseVerdict v) { return v == CaseVerdict::ZA ? "ZA" : "MP"; }

struct Classification {
    CaseVerdict verdict;
    double rho1 = 0.0;       ///< radius establishing MP (when applicable)
    double inf_value = 0.0;  ///< estimated sphere infimum at rho1
    std::vector<std::pair<double, double>> scan;  ///< (rho, estimated infimum)
};

/// ZA/MP dichotomy: estimates the sphere infimum on each radius of the grid
/// and returns MP with the first radius whose infimum clears the tolerance.
/// Estimates inside [tol/4, 4 tol] straddle the decision and are reported as
/// ambiguous; callers then attempt both branches.
inline Classification classify_case(const Objective& obj, const LaplaceOperator& op,
                                    const std::vector<double>& rho_grid, Rng& rng,
                                    const MountainPassOptions& mp = {}) {
    Classification cls{CaseVerdict::ZA, 0.0, 0.0, {}};
    bool ambiguous = false;
    for (double rho : rho_grid) {
        const double inf_est = sphere_infimum(obj, op, rho, mp.classify_starts, rng, mp);
        cls.scan.emplace_back(rho, inf_est);
        if (inf_est > 4.0 * mp.classify_tol) {
            cls.verdict = CaseVerdict::MP;
            cls.rho1 = rho;
            cls.inf_value = inf_est;
            return cls;
        }
        if (inf_est > mp.classify_tol / 4.0) ambiguous = true;
    }
    if (ambiguous)
        throw ClassificationAmbiguous("classify_case: sphere infima straddle the tolerance");
    return cls;
}

/// Production overload: classifies the translated energy around a first
/// solution on the geometric radius grid 2^{-1} .. 2^{-levels} of its norm.
inline Classification classify_case(const Field& u_lambda, const ProblemSpec& spec,
                                    const LaplaceOperator& op, Rng& rng,
                                    const MountainPassOptions& mp = {}) {
    const Objective obj = translated_objective(u_lambda, spec, op);
    std::vector<double> rho_grid;
    for (int k = 1; k <= mp.rho_levels; ++k)
        rho_grid.push_back(std::ldexp(h10_norm(u_lambda), -k));
    return classify_case(obj, op, rho_grid, rng, mp);
}

/// Nodal cutoff bubble as a Field. Radial grids host the bubble at the
/// origin (the center of Omega_a when the first solution stays below a);
/// box grids evaluate it at the given center.
inline Field bubble_field(const std::shared_ptr<const Grid>& grid, const BubbleSpec& bubble) {
    bubble.validate();
    check_bubble_inside(bubble, grid->kind);
    Field out(grid);
    for (int i = 0; i < out.size(); ++i)
        out.v[i] = cutoff_bubble(grid->node_coords(i), bubble, grid->dim_N, grid->kind);
    return out;
}

/// Discretized path in H+ for the deformation engine.
struct PathState {
    std::vector<Field> nodes;      ///< first node identically 0, last below level 0
    std::vector<double> energies;
    double gamma0_estimate = 0.0;
    int iterations = 0;
};

/// Straight-ray seed path 0 -> R U with R grown until the endpoint energy is
/// negative.
inline PathState make_bubble_path(const Objective& obj, const Field& bubble_profile,
                                  int n_nodes, double r_start = 1.0) {
    double R = r_start;
    int guard = 0;
    while (obj.value(scaled(bubble_profile, R)) >= 0.0) {
        R *= 1.25;
        if (++guard > 200)
            throw ConvergenceError("make_bubble_path: endpoint energy never became negative");
    }
    PathState path;
    path.nodes.reserve(n_nodes);
    for (int j = 0; j < n_nodes; ++j) {
        const double t = static_cast<double>(j) / (n_nodes - 1);
        path.nodes.push_back(scaled(bubble_profile, t * R));
    }
    path.energies.resize(n_nodes);
    for (int j = 0; j < n_nodes; ++j) path.energies[j] = obj.value(path.nodes[j]);
    path.gamma0_estimate = *std::max_element(path.energies.begin(), path.energies.end());
    return path;
}

struct BubbleCheckReport {
    double margin;     ///< min over samples of threshold - I(t R0 U_eps)
    double eps;
    double r0;
    double max_ray_value;   ///< max over the t-grid
    double worst_large_R;   ///< max of I(R U) over R in [R0, 4 R0]; must be < 0
};

/// Scans the bubble ray against the two Talenti-path inequalities: negativity
/// of I at large amplitude and the strict threshold bound along t R0 U_eps.
inline BubbleCheckReport bubble_path_check(const Field& u_lambda, const ProblemSpec& spec,
                                           const Objective& obj, const BubbleSpec& bubble,
                                           double R0, double threshold_value) {
    // the cutoff ball must sit inside {u_lambda < a}
    const auto& grid = *u_lambda.grid;
    for (int i = 0; i < u_lambda.size(); ++i) {
        const auto x = grid.node_coords(i);
        double rho2 = 0.0;
        for (int d = 0; d < 3; ++d) {
            const double dx = x[d] - bubble.center[d];
            rho2 += dx * dx;
        }
        if (rho2 <= bubble.cutoff_radius * bubble.cutoff_radius &&
            !(u_lambda.v[i] < spec.a))
            throw GeometryError("bubble_path_check: cutoff ball not inside {u_lambda < a}");
    }
    Field U = bubble_field(u_lambda.grid, bubble);
    BubbleCheckReport rep{};
    rep.eps = bubble.eps;
    rep.r0 = R0;
    rep.worst_large_R = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 16; ++k) {
        const double R = R0 * (1.0 + 3.0 * k / 15.0);
        rep.worst_large_R = std::max(rep.worst_large_R, obj.value(scaled(U, R)));
    }
    if (!(rep.worst_large_R < 0.0))
        throw MarginViolation("bubble_path_check: I(R U) failed to be negative on [R0, 4R0]",
                              0.0, bubble.eps);
    rep.max_ray_value = -std::numeric_limits<double>::infinity();
    double worst_t = 0.0;
    for (int k = 1; k <= 64; ++k) {
        const double t = static_cast<double>(k) / 64.0;
        const double val = obj.value(scaled(U, t * R0));
        if (val > rep.max_ray_value) {
            rep.max_ray_value = val;
            worst_t = t;
        }
    }
    rep.margin = threshold_value - rep.max_ray_value;
    if (!(rep.margin > 0.0))
        throw MarginViolation("bubble_path_check: threshold margin violated", worst_t,
                              bubble.eps);
    return rep;
}

namespace detail {

/// Energy-arclength reparametrization: nodes are redistributed uniformly in
/// the cumulative H^1-distance-plus-energy-variation measure along the
/// polyline. Endpoints are fixed.
inline void reparametrize_path(PathState& path, const Objective& obj) {
    const int K = static_cast<int>(path.nodes.size());
    std::vector<double> cum(K, 0.0);
    for (int j = 0; j + 1 < K; ++j) {
        const Field d = subtracted(path.nodes[j + 1], path.nodes[j]);
        cum[j + 1] = cum[j] + h10_norm(d) +
                     0.1 * std::abs(path.energies[j + 1] - path.energies[j]);
    }
    if (!(cum[K - 1] > 0.0)) return;
    std::vector<Field> fresh;
    fresh.reserve(K);
    fresh.push_back(path.nodes.front());
    for (int m = 1; m + 1 < K; ++m) {
        const double target = cum[K - 1] * m / (K - 1);
        int j = 0;
        while (j + 2 < K && cum[j + 1] < target) ++j;
        const double seg = cum[j + 1] - cum[j];
        const double th = seg > 0.0 ? (target - cum[j]) / seg : 0.0;
        Field node = scaled(path.nodes[j], 1.0 - th);
        axpy(node, th, path.nodes[j + 1]);
        fresh.push_back(positive_part(node));
    }
    fresh.push_back(path.nodes.back());
    path.nodes = std::move(fresh);
    for (int j = 0; j < K; ++j) path.energies[j] = obj.value(path.nodes[j]);
}

/// Active-set damped Newton on the translated system A v = lambda (g~ + f~),
/// v >= 0. Nodes pinned at zero with outward-pushing residual are held;
/// convergence is measured on the free residual.
struct PolishResult {
    Field v;
    double residual = 0.0;
    bool converged = false;
};

inline PolishResult polish_translated(const Field& seed, const Field& u_lambda,
                                      const ProblemSpec& spec, const LaplaceOperator& op,
                                      double tol, double accept_tol, int max_iter = 300) {
    const double ts = spec.two_star();
    Field v = positive_part(seed);
    auto free_residual = [&](const Field& w, Field& F) {
        F = op.apply(w);
        const std::vector<double> n = translated_rhs(w, u_lambda, spec);
        double res = 0.0;
        for (int i = 0; i < w.size(); ++i) {
            F.v[i] -= n[i];
            if (!(w.v[i] <= 0.0 && F.v[i] > 0.0)) res = std::max(res, std::abs(F.v[i]));
        }
        return res;
    };
    Field F(v.grid);
    double res = free_residual(v, F);
    PolishResult out;
    for (int it = 0; it < max_iter; ++it) {
        if (res <= tol) {
            out.v = std::move(v);
            out.residual = res;
            out.converged = true;
            return out;
        }
        std::vector<double> shift(v.size(), 0.0);
        for (int i = 0; i < v.size(); ++i) {
            if (v.v[i] > 0.0) {
                const double w = u_lambda.v[i] + v.v[i];
                double dn = (ts - 1.0) * std::pow(w, ts - 2.0);
                if (w < spec.a) dn -= spec.delta * std::pow(w, -spec.delta - 1.0);
                shift[i] = -spec.lambda * dn;
            }
        }
        Field rhs(v.grid);
        std::vector<int> active;
        for (int i = 0; i < v.size(); ++i) {
            if (v.v[i] <= 0.0 && F.v[i] > 0.0) {
                active.push_back(i);
                rhs.v[i] = 0.0;
            } else {
                rhs.v[i] = -F.v[i];
            }
        }
        // pin active nodes by a large diagonal shift; off-diagonal leakage is
        // removed by zeroing their rhs
        for (int i : active) shift[i] = 1e30;
        Field step = op.solve_shifted(shift, rhs);
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k <= 45 && !accepted; ++k, t *= 0.5) {
            Field cand = v;
            axpy(cand, t, step);
            cand = positive_part(cand);
            Field Fc(v.grid);
            const double rc = free_residual(cand, Fc);
            if (rc < res) {
                v = std::move(cand);
                F = std::move(Fc);
                res = rc;
                accepted = true;
            }
        }
        if (!accepted) break;
    }
    out.v = std::move(v);
    out.residual = res;
    out.converged = res <= accept_tol;
    return out;
}

}  // namespace detail

/// Peak-descent deformation of the seeded path with periodic Newton polish of
/// the peak node. Accepts the first polished nontrivial critical point with
/// 0 < I(v) < threshold; a stall with the peak still at or above the
/// threshold raises StallAboveThreshold.
///
/// The jump term's generalized derivative is handled pessimistically: the
/// descent direction uses the strict-indicator branch, which bounds the
/// directional derivative from above, so accepted steps never overstate the
/// descent.
using PathTrace = std::vector<std::array<double, 3>>;  ///< (sweep, node, energy)

/// Generic deformation sweeps on a seeded path: locate the interior peak,
/// take one backtracked descent step on it, project to H+, reparametrize.
/// The peak estimate never increases (a redistribution that would raise it
/// is rejected). Returns the final peak value; the path carries the running
/// gamma0 estimate and sweep count.
inline double deform_sweeps(const Objective& obj, PathState& path, int n_sweeps,
                            const MountainPassOptions& mp = {}, PathTrace* trace = nullptr) {
    const int K = static_cast<int>(path.nodes.size());
    for (int j = 0; j < K; ++j) path.energies[j] = obj.value(path.nodes[j]);
    double peak_val = *std::max_element(path.energies.begin(), path.energies.end());
    for (int sweep = 0; sweep < n_sweeps; ++sweep) {
        if (trace)
            for (int j = 0; j < K; ++j)
                trace->push_back({static_cast<double>(sweep), static_cast<double>(j),
                                  path.energies[j]});
        int k_peak = 0;
        for (int j = 1; j < K; ++j)
            if (path.energies[j] > path.energies[k_peak]) k_peak = j;
        if (k_peak == 0 || k_peak == K - 1) break;
        Field g = obj.gradient(path.nodes[k_peak]);
        const double gn = h10_norm(g);
        if (!(gn > 0.0)) break;
        double tau = mp.step_fraction * std::max(h10_norm(path.nodes[k_peak]), 1.0) / gn;
        bool accepted = false;
        const double pk = path.energies[k_peak];
        for (int k = 0; k <= 45 && !accepted; ++k, tau *= 0.5) {
            Field cand = path.nodes[k_peak];
            axpy(cand, -tau, g);
            cand = positive_part(cand);
            if (obj.value(cand) < pk - 1e-15 * (1.0 + std::abs(pk))) {
                path.nodes[k_peak] = std::move(cand);
                path.energies[k_peak] = obj.value(path.nodes[k_peak]);
                accepted = true;
            }
        }
        if (!accepted) break;
        PathState trial = path;
        detail::reparametrize_path(trial, obj);
        const double trial_peak = *std::max_element(trial.energies.begin(), trial.energies.end());
        const double cur_peak = *std::max_element(path.energies.begin(), path.energies.end());
        if (trial_peak <= cur_peak + 1e-15 * (1.0 + std::abs(cur_peak))) path = std::move(trial);
        const double new_peak = *std::max_element(path.energies.begin(), path.energies.end());
        peak_val = std::min(peak_val, new_peak);
        path.gamma0_estimate = peak_val;
        path.iterations = sweep + 1;
    }
    path.gamma0_estimate = peak_val;
    return peak_val;
}

inline SolveReport mp_solve(const Field& u_lambda, const ProblemSpec& spec,
                            const LaplaceOperator& op, PathState& path,
                            double threshold_value, const MountainPassOptions& mp = {},
                            double newton_tol = 1e-9, PathTrace* trace = nullptr) {
    const Objective obj = translated_objective(u_lambda, spec, op);
    const int K = static_cast<int>(path.nodes.size());
    if (K < 3) throw DomainError("mp_solve: path needs at least three nodes");
    for (int j = 0; j < K; ++j) path.energies[j] = obj.value(path.nodes[j]);
    if (!(path.energies.back() < 0.0))
        throw DomainError("mp_solve: path endpoint must have negative energy");

    auto try_accept = [&](const Field& seed) -> std::optional<SolveReport> {
        detail::PolishResult pr = detail::polish_translated(seed, u_lambda, spec, op,
                                                            newton_tol, mp.residual_tol);
        if (!pr.converged) return std::nullopt;
        const double gamma0 = obj.value(pr.v);
        if (!(gamma0 > 0.0 && gamma0 < threshold_value)) return std::nullopt;
        if (!(norm_inf(pr.v) > mp.distinct_tol)) return std::nullopt;
        // re-verify that the composition solves the original jump problem
        Field composed = added(u_lambda, pr.v);
        Field Au = op.apply(composed);
        double comp_res = 0.0;
        for (int i = 0; i < composed.size(); ++i)
            comp_res = std::max(comp_res, std::abs(Au.v[i] - rhs_full(composed.v[i], spec)));
        if (!(comp_res <= mp.residual_tol)) return std::nullopt;
        SolveReport rep;
        rep.solution = pr.v;
        rep.converged = true;
        rep.residual_inf = pr.residual;
        rep.energy = energy_I(rep.solution, u_lambda, spec);
        return rep;
    };
    // the pass point sits near the peak; seeds just past it land in the
    // nontrivial basin rather than flowing back to the local minimum at zero
    auto try_accept_around = [&](int k_peak) -> std::optional<SolveReport> {
        for (int off : {0, 1, 2, -1, 3}) {
            const int k = k_peak + off;
            if (k <= 0 || k >= K - 1) continue;
            if (auto rep = try_accept(path.nodes[k])) return rep;
        }
        return std::nullopt;
    };

    double prev_peak = std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < mp.max_sweeps; ++sweep) {
        if (trace)
            for (int j = 0; j < K; ++j)
                trace->push_back({static_cast<double>(sweep), static_cast<double>(j),
                                  path.energies[j]});
        int k_peak = 0;
        for (int j = 1; j < K; ++j)
            if (path.energies[j] > path.energies[k_peak]) k_peak = j;
        const double peak = path.energies[k_peak];
        path.gamma0_estimate = peak;
        path.iterations = sweep;
        if (k_peak == 0 || k_peak == K - 1) {
            // the discrete path tunneled through the ridge; last chance from
            // the remaining interior nodes
            for (int k = 1; k + 1 < K; ++k)
                if (auto rep = try_accept(path.nodes[k])) {
                    path.gamma0_estimate = rep->energy.total;
                    rep->iterations = sweep;
                    return *rep;
                }
            throw ConvergenceError("mp_solve: path peak migrated to an endpoint");
        }

        if (sweep % mp.polish_every == 0 && peak < 1.05 * threshold_value) {
            if (auto rep = try_accept_around(k_peak)) {
                path.gamma0_estimate = rep->energy.total;
                rep->iterations = sweep;
                return *rep;
            }
        }

        const bool stalled = std::abs(prev_peak - peak) < mp.stall_tol * (1.0 + std::abs(peak));
        if (stalled) {
            if (auto rep = try_accept_around(k_peak)) {
                path.gamma0_estimate = rep->energy.total;
                rep->iterations = sweep;
                return *rep;
            }
            if (peak >= threshold_value)
                throw StallAboveThreshold("mp_solve: deformation stalled at level " +
                                          std::to_string(peak));
            throw ConvergenceError("mp_solve: stalled below threshold without a certified point");
        }
        prev_peak = peak;

        Field g = obj.gradient(path.nodes[k_peak]);
        const double gn = h10_norm(g);
        if (!(gn > 0.0))
            throw ConvergenceError("mp_solve: vanishing gradient without certification");
        double tau = mp.step_fraction * std::max(h10_norm(path.nodes[k_peak]), 1.0) / gn;
        bool accepted = false;
        for (int k = 0; k <= 45 && !accepted; ++k, tau *= 0.5) {
            Field cand = path.nodes[k_peak];
            axpy(cand, -tau, g);
            cand = positive_part(cand);
            if (obj.value(cand) < peak - 1e-15 * (1.0 + std::abs(peak))) {
                path.nodes[k_peak] = std::move(cand);
                path.energies[k_peak] = obj.value(path.nodes[k_peak]);
                accepted = true;
            }
        }
        if (!accepted) {
            if (auto rep = try_accept_around(k_peak)) {
                path.gamma0_estimate = rep->energy.total;
                rep->iterations = sweep;
                return *rep;
            }
            if (peak >= threshold_value)
                throw StallAboveThreshold("mp_solve: no descent available at level " +
                                          std::to_string(peak));
            throw ConvergenceError("mp_solve: descent exhausted without a certified point");
        }

        // reparametrize; reject the redistribution if it would raise the peak
        PathState trial = path;
        detail::reparametrize_path(trial, obj);
        const double trial_peak = *std::max_element(trial.energies.begin(), trial.energies.end());
        const double cur_peak = *std::max_element(path.energies.begin(), path.energies.end());
        if (trial_peak <= cur_peak + 1e-15 * (1.0 + std::abs(cur_peak))) path = std::move(trial);
    }
    throw ConvergenceError("mp_solve: sweep budget exhausted");
}

/// Annulus descent for the zero-altitude case: drives the objective toward
/// its flat infimum while the norm is confined to [rho - r, rho + r],
/// r = rho/4. Persistent collapse against the inner wall contradicts the ZA
/// verdict and raises EscapeToZero.
inline SolveReport za_descend(const Objective& obj, const LaplaceOperator& op, double rho,
                              Rng& rng, const MountainPassOptions& mp = {},
                              double value_tol = 1e-6) {
    const double r = rho / 4.0;
    Field u;
    double nrm = 0.0;
    do {
        u = positive_part(smoothed_noise(op, rng));
        nrm = h10_norm(u);
    } while (!(nrm > 0.0));
    for (double& x : u.v) x *= rho / nrm;
    double val = obj.value(u);
    auto project = [&](Field& w) {
        w = positive_part(w);
        double n2 = h10_norm(w);
        if (!(n2 > 0.0)) return;
        if (n2 < rho - r)
            for (double& x : w.v) x *= (rho - r) / n2;
        else if (n2 > rho + r)
            for (double& x : w.v) x *= (rho + r) / n2;
    };
    for (int it = 0; it < 40 * mp.descent_max_iter; ++it) {
        Field g = obj.gradient(u);
        const double gn = h10_norm(g);
        if (!(gn > 0.0)) break;
        double tau = mp.step_fraction * rho / gn;
        bool accepted = false;
        for (int k = 0; k < 40 && !accepted; ++k, tau *= 0.5) {
            Field cand = u;
            axpy(cand, -tau, g);
            project(cand);
            const double cv = obj.value(cand);
            if (cv < val - 1e-15 * (1.0 + std::abs(val))) {
                u = std::move(cand);
                val = cv;
                accepted = true;
            }
        }
        if (!accepted) break;
    }
    // a stall on the inner wall with the descent still pointing inward means
    // the landscape pulls toward the origin, contradicting the ZA premise
    if (val > value_tol && h10_norm(u) <= rho - r + 1e-10 * rho &&
        h10_inner(obj.gradient(u), u) > 0.0)
        throw EscapeToZero("za_descend: descent collapses against the inner norm wall");
    SolveReport rep;
    rep.solution = u;
    rep.converged = val <= value_tol && h10_norm(u) >= rho / 2.0;
    rep.residual_inf = std::abs(val);
    rep.energy.total = val;
    return rep;
}

/// Production ZA branch: annulus descent on the translated energy, then the
/// same Newton polish as the MP branch to certify a critical point.
inline SolveReport za_solve(const Field& u_lambda, const ProblemSpec& spec,
                            const LaplaceOperator& op, double rho, Rng& rng,
                            const MountainPassOptions& mp = {}, double newton_tol = 1e-9) {
    const Objective obj = translated_objective(u_lambda, spec, op);
    SolveReport coarse = za_descend(obj, op, rho, rng, mp);
    detail::PolishResult pr = detail::polish_translated(coarse.solution, u_lambda, spec, op,
                                                        newton_tol, mp.residual_tol);
    if (!pr.converged)
        throw ConvergenceError("za_solve: polish failed at residual " +
                               std::to_string(pr.residual));
    if (h10_norm(pr.v) < rho / 2.0)
        throw EscapeToZero("za_solve: polished point lost the norm lower bound");
    SolveReport rep;
    rep.solution = pr.v;
    rep.converged = true;
    rep.residual_inf = pr.residual;
    rep.energy = energy_I(rep.solution, u_lambda, spec);
    return rep;
}

}  // namespace critsing
