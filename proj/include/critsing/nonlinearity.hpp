#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "critsing/errors.hpp"
#include "critsing/problem.hpp"

namespace critsing {

/// Regularized jump indicator: 1 for t <= -eps, linear ramp on (-eps, 0),
/// 0 for t >= 0. Continuous, nonincreasing, [0,1]-valued.
inline double chi_eps(double t, const JumpRegularization& reg) {
    if (t <= -reg.eps) return 1.0;
    if (t >= 0.0) return 0.0;
    return -t / reg.eps;
}

/// Full reaction term lambda (u^{2*-1} + chi_{u<a} u^{-delta}).
/// The jump is selected by the strict inequality u < a; ties at u = a
/// carry no singular contribution.
inline double rhs_full(double u, const ProblemSpec& spec) {
    if (u < u_floor)
        throw DomainError("rhs_full: argument below positivity floor");
    double val = std::pow(u, spec.two_star() - 1.0);
    if (u < spec.a) val += std::pow(u, -spec.delta);
    return spec.lambda * val;
}

namespace detail {

// Antiderivative of t^{-delta}; the delta = 1 case takes the log branch.
inline double singular_primitive(double t, double delta) {
    if (delta == 1.0) return std::log(t);
    return std::pow(t, 1.0 - delta) / (1.0 - delta);
}

// Antiderivative of t^{1-delta}; log branch at delta = 2.
inline double singular_primitive2(double t, double delta) {
    if (delta == 2.0) return std::log(t);
    return std::pow(t, 2.0 - delta) / (2.0 - delta);
}

}  // namespace detail

/// Primitive G of the jumping singular term: G(u) = int_0^u chi_{t<a} t^{-delta} dt
/// in the principal-value sense fixed by the piecewise definition
///   G(u) = 0                          for u <= 0,
///   G(u) = u^{1-delta}/(1-delta)      for 0 < u < a  (log u when delta = 1),
///   G(u) = G(a)                       for u >= a.
/// Continuous on (0,infty), constant on [a,infty).
inline double primitive_G(double u, const ProblemSpec& spec) {
    if (u <= 0.0) return 0.0;
    return detail::singular_primitive(std::min(u, spec.a), spec.delta);
}

/// Mollified primitive with chi_{t<a} replaced by chi_eps(t-a). Identical to
/// primitive_G below a - eps; on (a-eps, a) the ramp is integrated in closed
/// form; constant above a. Requires eps < a/2.
inline double primitive_G_eps(double u, const ProblemSpec& spec,
                              const JumpRegularization& reg) {
    reg.validate_against(spec.a);
    const double lo = spec.a - reg.eps;
    if (u <= lo) return primitive_G(u, spec);
    // int (a-t)/eps * t^{-delta} dt = (a*I1(t) - I2(t))/eps
    auto ramp = [&](double t) {
        return (spec.a * detail::singular_primitive(t, spec.delta) -
                detail::singular_primitive2(t, spec.delta)) / reg.eps;
    };
    const double cap = std::min(u, spec.a);
    return primitive_G(lo, spec) + ramp(cap) - ramp(lo);
}

/// Translated nonlinearity at one point: s is the translation variable and
/// u_lambda_x the first-solution value there. Both parts vanish for s <= 0.
struct TranslatedTerms {
    double g;  ///< jump/singular difference
    double f;  ///< critical power difference
};

inline TranslatedTerms translated_terms(double s, double u_lambda_x,
                                        const ProblemSpec& spec) {
    if (u_lambda_x < u_floor)
        throw DomainError("translated_terms: u_lambda value below positivity floor");
    if (s <= 0.0) return {0.0, 0.0};
    const double w = s + u_lambda_x;
    const double p = spec.two_star() - 1.0;
    double g = 0.0;
    if (w < spec.a) g += std::pow(w, -spec.delta);
    if (u_lambda_x < spec.a) g -= std::pow(u_lambda_x, -spec.delta);
    return {g, std::pow(w, p) - std::pow(u_lambda_x, p)};
}

/// Closed-form positive solution of -p'' = p^{-delta}, p(0) = 0 on (0,infty),
/// valid for delta > 1:
///   p(t) = [ (1+delta)^2 / (2(delta-1)) ]^{1/(1+delta)} t^{2/(delta+1)}.
inline double singular_ode_profile(double t, double delta) {
    if (!(delta > 1.0))
        throw DomainError("singular_ode_profile: closed form requires delta > 1");
    if (t < 0.0) throw DomainError("singular_ode_profile: t must be nonnegative");
    const double k = std::pow((1.0 + delta) * (1.0 + delta) / (2.0 * (delta - 1.0)),
                              1.0 / (1.0 + delta));
    return k * std::pow(t, 2.0 / (delta + 1.0));
}

/// Power adjustment of the principal eigenfunction used as a lower barrier:
/// e1 for delta < 1, e1 (-log e1)^{1/2} at delta = 1, e1^{2/(delta+1)} above.
/// Requires 0 < e1 < 1 (the eigenfunction is sup-normalized below 1).
inline double phi_delta(double e1_value, double delta) {
    if (!(e1_value > 0.0 && e1_value < 1.0))
        throw DomainError("phi_delta: e1 value must lie in (0,1)");
    if (delta < 1.0) return e1_value;
    if (delta == 1.0) return e1_value * std::sqrt(-std::log(e1_value));
    return std::pow(e1_value, 2.0 / (delta + 1.0));
}

/// Talenti bubble at distance rho from its center:
///   V_eps(rho) = c_n eps^{(N-2)/2} / (eps^2 + rho^2)^{(N-2)/2}.
inline double talenti_radial(double rho, double eps, double c_n, int N) {
    if (!(eps > 0.0)) throw DomainError("talenti_radial: eps must be positive");
    const double q = (N - 2) / 2.0;
    return c_n * std::pow(eps, q) / std::pow(eps * eps + rho * rho, q);
}

inline double talenti(const std::array<double, 3>& x, const BubbleSpec& bubble, int N) {
    bubble.validate();
    double rho2 = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double dx = x[d] - bubble.center[d];
        rho2 += dx * dx;
    }
    return talenti_radial(std::sqrt(rho2), bubble.eps, bubble.c_n, N);
}

/// Cubic smoothstep cutoff: 1 on [0,r], descending to 0 on [r,2r].
inline double bubble_cutoff(double rho, double r) {
    if (rho <= r) return 1.0;
    if (rho >= 2.0 * r) return 0.0;
    const double x = (rho - r) / r;
    return 2.0 * x * x * x - 3.0 * x * x + 1.0;
}

inline void check_bubble_inside(const BubbleSpec& bubble, DomainKind domain) {
    const double reach = 2.0 * bubble.cutoff_radius;
    if (domain == DomainKind::RadialBall) {
        double c2 = 0.0;
        for (double c : bubble.center) c2 += c * c;
        if (std::sqrt(c2) + reach > 1.0)
            throw GeometryError("cutoff_bubble: 2r-ball exits the unit ball");
    } else {
        for (double c : bubble.center)
            if (c - reach < 0.0 || c + reach > 1.0)
                throw GeometryError("cutoff_bubble: 2r-ball exits the unit cube");
    }
}

/// Compactly supported bubble eta(x) V_eps(x - y); vanishes on the boundary.
inline double cutoff_bubble(const std::array<double, 3>& x, const BubbleSpec& bubble,
                            int N, DomainKind domain) {
    bubble.validate();
    check_bubble_inside(bubble, domain);
    double rho2 = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double dx = x[d] - bubble.center[d];
        rho2 += dx * dx;
    }
    const double rho = std::sqrt(rho2);
    const double eta = bubble_cutoff(rho, bubble.cutoff_radius);
    if (eta == 0.0) return 0.0;
    return eta * talenti_radial(rho, bubble.eps, bubble.c_n, N);
}

}  // namespace critsing
