#pragma once

#include <cmath>

#include "critsing/grid.hpp"

namespace critsing {

/// Cell-volume quadrature of a nodal field over the domain. Fields vanish on
/// the boundary cells, so interior cells suffice.
inline double integrate(const Field& u) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) s += u.grid->cell_volume[i] * u.v[i];
    return s;
}

template <typename F>
double integrate_pointwise(const Field& u, F&& f) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) s += u.grid->cell_volume[i] * f(u.v[i]);
    return s;
}

inline double l2_inner(const Field& u, const Field& w) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i) s += u.grid->cell_volume[i] * u.v[i] * w.v[i];
    return s;
}

inline double l2_norm(const Field& u) { return std::sqrt(l2_inner(u, u)); }

inline double lp_norm(const Field& u, double p) {
    double s = 0.0;
    for (int i = 0; i < u.size(); ++i)
        s += u.grid->cell_volume[i] * std::pow(std::abs(u.v[i]), p);
    return std::pow(s, 1.0 / p);
}

/// Critical-exponent norm L^{2*} with 2* from the grid's dimension.
inline double l2star_norm(const Field& u) {
    const double p = 2.0 * u.grid->dim_N / (u.grid->dim_N - 2.0);
    return lp_norm(u, p);
}

/// Discrete H^1_0 pairing: the exact Dirichlet form of the flux-based
/// Laplacian, so that h10_inner(u, w) == l2_inner(laplacian_apply(u), w)
/// identically. Edge-based; edges into the boundary see the zero trace.
inline double h10_inner(const Field& u, const Field& w) {
    const Grid& g = *u.grid;
    double s = 0.0;
    if (g.kind == DomainKind::RadialBall) {
        const int n = g.n_interior;
        for (int e = 0; e < n; ++e) {
            const double du = (e + 1 < n ? u.v[e + 1] : 0.0) - u.v[e];
            const double dw = (e + 1 < n ? w.v[e + 1] : 0.0) - w.v[e];
            s += g.edge_coeff[e] * du * dw;
        }
        return sphere_surface_area(g.dim_N) * s / g.h;
    }
    const int m = g.M;
    auto at = [&](const Field& f, int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= m || j >= m || k >= m) return 0.0;
        return f.v[g.box_index(i, j, k)];
    };
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const double uc = at(u, i, j, k), wc = at(w, i, j, k);
                // upper edges in each axis, plus lower-wall edges
                s += (at(u, i + 1, j, k) - uc) * (at(w, i + 1, j, k) - wc);
                s += (at(u, i, j + 1, k) - uc) * (at(w, i, j + 1, k) - wc);
                s += (at(u, i, j, k + 1) - uc) * (at(w, i, j, k + 1) - wc);
                if (i == 0) s += uc * wc;
                if (j == 0) s += uc * wc;
                if (k == 0) s += uc * wc;
            }
    return g.h * s;
}

inline double h10_norm(const Field& u) {
    return std::sqrt(std::max(h10_inner(u, u), 0.0));
}

}  // namespace critsing
