#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "critsing/errors.hpp"
#include "critsing/problem.hpp"

namespace critsing {

/// Surface area of the unit sphere S^{N-1}.
inline double sphere_surface_area(int N) {
    return 2.0 * std::pow(M_PI, N / 2.0) / std::tgamma(N / 2.0);
}

/// Immutable discretization of the unit ball (radial reduction) or the unit
/// cube. Boundary nodes carry the value 0 in every Field built on the grid;
/// only interior nodes are stored.
///
/// Radial: M nodes on [0,1], spacing h = 1/(M-1); the origin node is interior
/// with the symmetric regularity stencil, node M-1 is the boundary.
/// Box3D: M^3 interior nodes, spacing h = 1/(M+1) per axis.
class Grid {
public:
    DomainKind kind;
    int dim_N;         ///< space dimension (3 for Box3D)
    int M;             ///< nodes per axis (radial: including the boundary node)
    double h;          ///< spacing
    int n_interior;

    // radial data (empty for box): node radii, flux coefficients
    // s_e = r_{e+1/2}^{N-1} on edge e (between nodes e and e+1, the last edge
    // reaching the boundary), and 1-D cell measures int_cell r^{N-1} dr.
    std::vector<double> r;
    std::vector<double> edge_coeff;
    std::vector<double> vol1d;

    /// N-dimensional measure of each interior node's cell (radial cells carry
    /// the surface-area factor; box cells are h^3).
    std::vector<double> cell_volume;
    /// Measure of the boundary shell/strip not covered by interior cells.
    double boundary_volume = 0.0;

    static std::shared_ptr<const Grid> radial(int N, int M) {
        if (N < 3) throw DomainError("Grid::radial: N must be >= 3");
        if (M < 16) throw DomainError("Grid::radial: M must be >= 16");
        auto g = std::make_shared<Grid>();
        g->kind = DomainKind::RadialBall;
        g->dim_N = N;
        g->M = M;
        g->h = 1.0 / (M - 1);
        g->n_interior = M - 1;
        const int n = g->n_interior;
        const double h = g->h;
        const double omega = sphere_surface_area(N);
        g->r.resize(n);
        g->edge_coeff.resize(n);
        g->vol1d.resize(n);
        g->cell_volume.resize(n);
        for (int i = 0; i < n; ++i) {
            g->r[i] = i * h;
            const double rp = g->r[i] + 0.5 * h;
            const double rm = (i == 0) ? 0.0 : g->r[i] - 0.5 * h;
            g->edge_coeff[i] = std::pow(rp, N - 1);
            g->vol1d[i] = (std::pow(rp, N) - std::pow(rm, N)) / N;
            g->cell_volume[i] = omega * g->vol1d[i];
        }
        g->boundary_volume = omega * (1.0 - std::pow(1.0 - 0.5 * h, N)) / N;
        return g;
    }

    static std::shared_ptr<const Grid> box3d(int M) {
        if (M < 16) throw DomainError("Grid::box3d: M must be >= 16");
        auto g = std::make_shared<Grid>();
        g->kind = DomainKind::Box3D;
        g->dim_N = 3;
        g->M = M;
        g->h = 1.0 / (M + 1);
        g->n_interior = M * M * M;
        g->cell_volume.assign(g->n_interior, g->h * g->h * g->h);
        g->boundary_volume = 1.0 - std::pow(1.0 - g->h, 3);
        return g;
    }

    int box_index(int i, int j, int k) const { return i + M * (j + M * k); }

    /// Coordinates of interior node idx (radial nodes report (r,0,0)).
    std::array<double, 3> node_coords(int idx) const {
        if (kind == DomainKind::RadialBall) return {r[idx], 0.0, 0.0};
        const int i = idx % M, j = (idx / M) % M, k = idx / (M * M);
        return {(i + 1) * h, (j + 1) * h, (k + 1) * h};
    }

    double total_volume() const {
        double v = boundary_volume;
        for (double c : cell_volume) v += c;
        return v;
    }
};

/// Nodal values of a scalar function over interior grid nodes; the boundary
/// trace is identically zero by construction.
struct Field {
    std::shared_ptr<const Grid> grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(std::shared_ptr<const Grid> g, double fill = 0.0)
        : grid(std::move(g)), v(grid->n_interior, fill) {}

    int size() const { return static_cast<int>(v.size()); }
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
};

inline Field zeros_like(const Field& u) { return Field(u.grid); }

inline double min_value(const Field& u) {
    return *std::min_element(u.v.begin(), u.v.end());
}

inline double max_value(const Field& u) {
    return *std::max_element(u.v.begin(), u.v.end());
}

inline double norm_inf(const Field& u) {
    double m = 0.0;
    for (double x : u.v) m = std::max(m, std::abs(x));
    return m;
}

inline double diff_inf(const Field& u, const Field& w) {
    double m = 0.0;
    for (int i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u.v[i] - w.v[i]));
    return m;
}

inline void axpy(Field& y, double alpha, const Field& x) {
    for (int i = 0; i < y.size(); ++i) y.v[i] += alpha * x.v[i];
}

inline Field scaled(const Field& u, double alpha) {
    Field out = u;
    for (double& x : out.v) x *= alpha;
    return out;
}

inline Field added(const Field& u, const Field& w) {
    Field out = u;
    axpy(out, 1.0, w);
    return out;
}

inline Field subtracted(const Field& u, const Field& w) {
    Field out = u;
    axpy(out, -1.0, w);
    return out;
}

/// Nodewise positive part; the negative part is clamped to the zero trace.
inline Field positive_part(const Field& u) {
    Field out = u;
    for (double& x : out.v) x = std::max(x, 0.0);
    return out;
}

inline Field negative_part(const Field& u) {
    Field out = u;
    for (double& x : out.v) x = std::max(-x, 0.0);
    return out;
}

inline bool all_finite(const Field& u) {
    for (double x : u.v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace critsing
