#pragma once

#include <cmath>
#include <vector>

#include "critsing/grid.hpp"
#include "critsing/nonlinearity.hpp"
#include "critsing/operators.hpp"
#include "critsing/quadrature.hpp"
#include "critsing/sampling.hpp"

namespace critsing {

/// The three parts of the variational energy; total is the exact arithmetic
/// combination of the stored parts.
struct EnergyBreakdown {
    double dirichlet = 0.0;  ///< (1/2) ||grad u||^2
    double g_term = 0.0;     ///< lambda int G(u)  (or the translated G-part)
    double critical = 0.0;   ///< (lambda/2*) int |u|^{2*}  (or the translated F-part)
    double total = 0.0;      ///< dirichlet - g_term - critical
};

/// E_lambda^a(u) = 1/2 int |grad u|^2 - lambda int G(u) - lambda/2* int |u|^{2*}.
/// G is evaluated by its closed piecewise primitive.
inline EnergyBreakdown energy_E(const Field& u, const ProblemSpec& spec) {
    EnergyBreakdown e;
    e.dirichlet = 0.5 * h10_inner(u, u);
    e.g_term = spec.lambda * integrate_pointwise(u, [&](double t) { return primitive_G(t, spec); });
    const double ts = spec.two_star();
    e.critical = spec.lambda / ts *
                 integrate_pointwise(u, [&](double t) { return std::pow(std::abs(t), ts); });
    e.total = e.dirichlet - e.g_term - e.critical;
    return e;
}

/// Mollified energy: G replaced by its chi_eps-smoothed primitive.
inline EnergyBreakdown energy_E_eps(const Field& u, const ProblemSpec& spec,
                                    const JumpRegularization& reg) {
    EnergyBreakdown e;
    e.dirichlet = 0.5 * h10_inner(u, u);
    e.g_term = spec.lambda *
               integrate_pointwise(u, [&](double t) { return primitive_G_eps(t, spec, reg); });
    const double ts = spec.two_star();
    e.critical = spec.lambda / ts *
                 integrate_pointwise(u, [&](double t) { return std::pow(std::abs(t), ts); });
    e.total = e.dirichlet - e.g_term - e.critical;
    return e;
}

namespace detail {

// Primitive of the translated jump term in s, integrated from 0 to t at a
// point where the first solution equals ul. The cap of primitive_G at the
// threshold a locates the jump s = a - ul exactly; no quadrature crosses it.
inline double translated_G(double t, double ul, const ProblemSpec& spec) {
    if (t <= 0.0) return 0.0;
    double val = primitive_G(ul + t, spec) - primitive_G(ul, spec);
    if (ul < spec.a) val -= t * std::pow(ul, -spec.delta);
    return val;
}

// Primitive of the translated critical term, in closed form.
inline double translated_F(double t, double ul, const ProblemSpec& spec) {
    if (t <= 0.0) return 0.0;
    const double ts = spec.two_star();
    return (std::pow(ul + t, ts) - std::pow(ul, ts)) / ts - t * std::pow(ul, ts - 1.0);
}

}  // namespace detail

/// Energy of the translated problem,
///   I_lambda(v) = 1/2 ||grad v||^2 - lambda int G~(x,v) - lambda int F~(x,v),
/// with the primitives taken in closed form per node. The g_term slot holds
/// the G~ part and the critical slot the F~ part.
inline EnergyBreakdown energy_I(const Field& v, const Field& u_lambda,
                                const ProblemSpec& spec) {
    EnergyBreakdown e;
    e.dirichlet = 0.5 * h10_inner(v, v);
    double g = 0.0, f = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        const double w = v.grid->cell_volume[i];
        g += w * detail::translated_G(v.v[i], u_lambda.v[i], spec);
        f += w * detail::translated_F(v.v[i], u_lambda.v[i], spec);
    }
    e.g_term = spec.lambda * g;
    e.critical = spec.lambda * f;
    e.total = e.dirichlet - e.g_term - e.critical;
    return e;
}

/// Two-sided bound on the generalized directional derivative of I at u in
/// direction phi. The measurable selector ranges over [chi_{<a}, chi_{<=a}];
/// it is only free on the nodal tie set {u_lambda + u = a}, so the interval
/// degenerates to a point for generic fields.
struct SlopeInterval {
    double low;
    double high;
};

inline SlopeInterval slope_bracket(const Field& u, const Field& phi,
                                   const Field& u_lambda, const ProblemSpec& spec) {
    if (min_value(u) < 0.0)
        throw DomainError("slope_bracket: u must be nonnegative");
    const double ts = spec.two_star();
    double base = h10_inner(added(u_lambda, u), phi);
    double tie_pos = 0.0, tie_neg = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        const double w = u_lambda.v[i] + u.v[i];
        const double cell = u.grid->cell_volume[i];
        base -= spec.lambda * cell * std::pow(w, ts - 1.0) * phi.v[i];
        if (w < spec.a) {
            base -= spec.lambda * cell * std::pow(w, -spec.delta) * phi.v[i];
        } else if (w == spec.a) {
            const double c = spec.lambda * cell * std::pow(w, -spec.delta) * phi.v[i];
            if (c > 0.0) tie_pos += c; else tie_neg -= c;
        }
    }
    return {base - tie_pos, base + tie_neg};
}

/// Result of sampling the energy landscape around a certified first solution.
struct ProbeReport {
    int n_probes = 0;
    double radius = 0.0;
    double min_gap = 0.0;
    double slack = 0.0;
    std::vector<int> violations;  ///< probe indices with gap < -slack
};

/// Samples random H^1_0-ball perturbations around u_lambda and reports the
/// minimal observed energy gap E(u_lambda + w) - E(u_lambda). Perturbations
/// that break interior positivity are rejected and redrawn.
inline ProbeReport local_min_probe(const Field& u_lambda, const ProblemSpec& spec,
                                   const LaplaceOperator& op, int n_probes,
                                   double radius, Rng& rng) {
    ProbeReport rep;
    rep.n_probes = n_probes;
    rep.radius = radius;
    const double e0 = energy_E(u_lambda, spec).total;
    rep.slack = 1e-10 * (1.0 + std::abs(e0));
    rep.min_gap = std::numeric_limits<double>::infinity();
    for (int p = 0; p < n_probes; ++p) {
        Field w;
        bool admissible = false;
        for (int tries = 0; tries < 200 && !admissible; ++tries) {
            w = probe_direction(op, rng, radius);
            admissible = min_value(added(u_lambda, w)) > u_floor;
        }
        if (!admissible)
            throw ProbeFailure("local_min_probe: could not draw a positivity-preserving probe");
        const double gap = energy_E(added(u_lambda, w), spec).total - e0;
        rep.min_gap = std::min(rep.min_gap, gap);
        if (gap < -rep.slack) rep.violations.push_back(p);
    }
    return rep;
}

inline void require_local_min(const ProbeReport& rep) {
    if (!rep.violations.empty())
        throw ProbeFailure("local_min_probe: " + std::to_string(rep.violations.size()) +
                           " perturbations decreased the energy beyond slack");
}

}  // namespace critsing
