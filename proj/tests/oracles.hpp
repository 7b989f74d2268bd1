// Test-only oracles, kept independent of the implementation paths they check:
// generic adaptive quadrature, dense 1-D scans, a radial shooting eigensolver
// and the closed-form Sobolev best constant.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (std::abs(err) <= 15.0 * tol || depth <= 0) return left + right + err / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double quad(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 45);
}

/// int_0^u t^{-delta} dt for delta < 1, by quadrature in log space (the
/// substitution t = e^x flattens the endpoint singularity).
inline double quad_singular_from_zero(double u, double delta, double t0 = 1e-60) {
    return quad([delta](double x) { return std::exp(x * (1.0 - delta)); }, std::log(t0),
                std::log(u));
}

/// Dense-grid minimum of a scalar function on [lo, hi].
inline double scan_min(const std::function<double(double)>& f, double lo, double hi,
                       int n = 200000) {
    double best = f(hi);
    for (int i = 0; i < n; ++i) {
        const double t = lo + (hi - lo) * (i + 0.5) / n;
        best = std::min(best, f(t));
    }
    return best;
}

/// Radial shooting for the principal Dirichlet eigenvalue of -Delta on the
/// unit ball in dimension N: integrates u'' + (N-1)/r u' + lam u = 0 from a
/// series start at the origin and bisects lam on the sign of u(1).
inline double shoot_ball_eigenvalue(int N) {
    auto endpoint = [N](double lam) {
        const int steps = 20000;
        const double h = 1.0 / steps;
        // series: u = 1 - lam r^2 / (2N) + O(r^4)
        double r = h;
        double u = 1.0 - lam * r * r / (2.0 * N);
        double v = -lam * r / N;
        auto acc = [&](double rr, double uu, double vv) {
            return -lam * uu - (N - 1) / rr * vv;
        };
        for (int i = 1; i < steps; ++i) {
            const double k1u = v, k1v = acc(r, u, v);
            const double k2u = v + 0.5 * h * k1v, k2v = acc(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
            const double k3u = v + 0.5 * h * k2v, k3v = acc(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
            const double k4u = v + h * k3v, k4v = acc(r + h, u + h * k3u, v + h * k3v);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            r += h;
        }
        return u;
    };
    // walk up to the first sign change, then bisect inside it
    double lo = 1.0, flo = endpoint(lo), hi = lo;
    for (int k = 0; k < 400; ++k) {
        hi = lo + 1.0;
        const double fhi = endpoint(hi);
        if ((flo > 0.0) != (fhi > 0.0)) break;
        lo = hi;
        flo = fhi;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = endpoint(mid);
        if ((flo > 0.0) == (fmid > 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Closed-form best Sobolev constant pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}.
inline double sobolev_best_constant(int N) {
    return M_PI * N * (N - 2) *
           std::pow(std::exp(std::lgamma(N / 2.0) - std::lgamma(static_cast<double>(N))),
                    2.0 / N);
}

}  // namespace oracles
