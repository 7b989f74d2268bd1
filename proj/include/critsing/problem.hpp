#pragma once

#include <array>
#include <cmath>
#include <string>

#include "critsing/errors.hpp"

namespace critsing {

/// Arguments below this floor are rejected by singular evaluations rather
/// than silently flushed; callers must maintain positivity.
inline constexpr double u_floor = 1e-14;

enum class DomainKind { RadialBall, Box3D };

inline std::string to_string(DomainKind k) {
    return k == DomainKind::RadialBall ? "radial" : "box3d";
}

/// Physical parameters of the problem
///   -Delta u = lambda (u^{2*-1} + chi_{u<a} u^{-delta}),  u|_boundary = 0
/// on the unit ball (radial reduction) or the unit cube.
struct ProblemSpec {
    int N = 3;               ///< space dimension, >= 3
    double delta = 0.5;      ///< singular exponent, in (0,3)
    double a = 1.0;          ///< jump threshold, > 0
    double lambda = 0.1;     ///< forcing parameter, > 0
    DomainKind domain = DomainKind::RadialBall;

    /// Critical Sobolev exponent 2N/(N-2); recomputed, never stored.
    double two_star() const { return 2.0 * N / (N - 2.0); }

    void validate() const {
        if (N < 3) throw DomainError("ProblemSpec: N must be >= 3");
        if (!(delta > 0.0 && delta < 3.0))
            throw DomainError("ProblemSpec: delta must lie in (0,3)");
        if (!(a > 0.0)) throw DomainError("ProblemSpec: a must be positive");
        if (!(lambda > 0.0)) throw DomainError("ProblemSpec: lambda must be positive");
    }

    ProblemSpec with_lambda(double lam) const {
        ProblemSpec s = *this;
        s.lambda = lam;
        return s;
    }
};

/// Smoothing width of the regularized jump chi_eps.
struct JumpRegularization {
    double eps;

    void validate() const {
        if (!(eps > 0.0)) throw DomainError("JumpRegularization: eps must be positive");
    }

    /// The mollified primitive's lower split point a/2 interacts with the
    /// smoothing band; widths at or above a/2 are rejected.
    void validate_against(double a) const {
        validate();
        if (!(eps < 0.5 * a))
            throw DomainError("JumpRegularization: eps must be below a/2");
    }
};

/// Concentration scale, center and cutoff data of one Talenti bubble
/// together with its normalization constant.
struct BubbleSpec {
    double eps;                        ///< concentration scale, > 0
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double cutoff_radius;              ///< eta == 1 inside this radius, 0 outside twice it
    double c_n;                        ///< normalization (N(N-2))^{(N-2)/4}

    void validate() const {
        if (!(eps > 0.0)) throw DomainError("BubbleSpec: eps must be positive");
        if (!(cutoff_radius > 0.0)) throw DomainError("BubbleSpec: cutoff_radius must be positive");
        if (!(c_n > 0.0)) throw DomainError("BubbleSpec: c_n must be positive");
    }
};

/// Normalization making V_eps an exact solution of -Delta V = V^{2*-1}.
inline double talenti_normalization(int N) {
    return std::pow(static_cast<double>(N) * (N - 2), (N - 2) / 4.0);
}

}  // namespace critsing
