#pragma once

#include <cstdint>
#include <random>

#include "critsing/operators.hpp"
#include "critsing/quadrature.hpp"

namespace critsing {

/// Deterministic random source; every stochastic ingredient of the pipeline
/// draws from one of these, seeded from the run configuration.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double normal() {
        std::normal_distribution<double> d(0.0, 1.0);
        return d(eng);
    }
    double uniform() {
        std::uniform_real_distribution<double> d(0.0, 1.0);
        return d(eng);
    }
};

/// Smoothed white noise: one Poisson solve of nodewise Gaussian noise.
/// Produces H^1_0-bounded probe fields.
inline Field smoothed_noise(const LaplaceOperator& op, Rng& rng) {
    Field w(op.grid());
    for (double& x : w.v) x = rng.normal();
    return op.solve(w);
}

/// Smoothed-noise probe scaled to a prescribed H^1_0 norm.
inline Field probe_direction(const LaplaceOperator& op, Rng& rng, double radius) {
    Field w = smoothed_noise(op, rng);
    const double nrm = h10_norm(w);
    if (!(nrm > 0.0)) throw ConvergenceError("probe_direction: degenerate noise draw");
    for (double& x : w.v) x *= radius / nrm;
    return w;
}

/// Signed probe with sign changes resolved at nodes: whenever two adjacent
/// nodes carry opposite signs, the later one is zeroed. Fields of this form
/// split as u = u+ - u- with h10-orthogonal parts, which is the discrete
/// counterpart of the a.e.-disjoint supports of the continuum decomposition.
inline Field signed_probe_resolved(const LaplaceOperator& op, Rng& rng, double radius) {
    Field w = probe_direction(op, rng, radius);
    const Grid& g = *w.grid;
    auto resolve = [&](int i, int j) {
        if (w.v[i] * w.v[j] < 0.0) w.v[j] = 0.0;
    };
    if (g.kind == DomainKind::RadialBall) {
        for (int i = 0; i + 1 < g.n_interior; ++i) resolve(i, i + 1);
    } else {
        const int m = g.M;
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) {
                    const int idx = g.box_index(i, j, k);
                    if (i + 1 < m) resolve(idx, g.box_index(i + 1, j, k));
                    if (j + 1 < m) resolve(idx, g.box_index(i, j + 1, k));
                    if (k + 1 < m) resolve(idx, g.box_index(i, j, k + 1));
                }
    }
    return w;
}

}  // namespace critsing
