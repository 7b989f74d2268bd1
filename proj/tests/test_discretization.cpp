#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "critsing/operators.hpp"
#include "critsing/quadrature.hpp"
#include "critsing/sampling.hpp"
#include "oracles.hpp"

using namespace critsing;

TEST_CASE("radial laplacian on the quadratic 1 - r^2") {
    for (int N : {3, 4, 5}) {
        auto grid = Grid::radial(N, 128);
        LaplaceOperator op(grid);
        Field u(grid);
        for (int i = 0; i < u.size(); ++i) u.v[i] = 1.0 - grid->r[i] * grid->r[i];
        Field lap = op.apply(u);
        // the flux of 1 - r^2 is -2 r^N, whose exact finite-volume derivative
        // is 2N at every interior node, the origin included
        for (int i = 0; i < u.size(); ++i)
            CHECK(lap.v[i] == Catch::Approx(2.0 * N).epsilon(1e-11));
    }
}

TEST_CASE("laplacian is linear and exactly self-adjoint in the cell inner product") {
    for (auto grid : {Grid::radial(3, 96), Grid::radial(5, 64)}) {
        LaplaceOperator op(grid);
        Rng rng(7);
        Field u = smoothed_noise(op, rng), w = smoothed_noise(op, rng);
        Field combo = scaled(u, 2.5);
        axpy(combo, -1.25, w);
        Field lhs_f = op.apply(combo);
        Field rhs_f = scaled(op.apply(u), 2.5);
        axpy(rhs_f, -1.25, op.apply(w));
        CHECK(diff_inf(lhs_f, rhs_f) <= 1e-10 * (1.0 + norm_inf(lhs_f)));
        // the h10 form is the operator's Dirichlet form, bit-tight
        const double lhs = h10_inner(u, w);
        CHECK(lhs == Catch::Approx(l2_inner(op.apply(u), w)).epsilon(1e-11));
        CHECK(lhs == Catch::Approx(l2_inner(u, op.apply(w))).epsilon(1e-11));
    }
    auto grid = Grid::box3d(16);
    LaplaceOperator op(grid);
    Rng rng(3);
    Field u = smoothed_noise(op, rng), w = smoothed_noise(op, rng);
    CHECK(h10_inner(u, w) == Catch::Approx(l2_inner(op.apply(u), w)).epsilon(1e-11));
}

TEST_CASE("principal eigenpair on the unit ball, N = 3") {
    auto grid = Grid::radial(3, 512);
    LaplaceOperator op(grid);
    EigenPair eig = eigen_first(op);
    CHECK(eig.lambda1 == Catch::Approx(M_PI * M_PI).margin(5e-4));
    CHECK(max_value(eig.e1) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(min_value(eig.e1) > 0.0);
    // shape against sin(pi r)/r, matched at the origin limit pi
    const double scale = eig.e1.v[0] / M_PI;
    for (int i = 1; i < eig.e1.size(); ++i) {
        const double r = grid->r[i];
        CHECK(eig.e1.v[i] == Catch::Approx(scale * std::sin(M_PI * r) / r).margin(2e-4));
    }
    // laplacian_apply(e1) recovers lambda1 e1
    Field Ae = op.apply(eig.e1);
    double res = 0.0;
    for (int i = 0; i < Ae.size(); ++i)
        res = std::max(res, std::abs(Ae.v[i] - eig.lambda1 * eig.e1.v[i]));
    CHECK(res <= 1e-6 * eig.lambda1 * norm_inf(eig.e1));
    // Rayleigh identity through the quadrature forms, exact by adjointness
    CHECK(h10_inner(eig.e1, eig.e1) ==
          Catch::Approx(eig.lambda1 * l2_inner(eig.e1, eig.e1)).epsilon(1e-10));
}

TEST_CASE("principal eigenvalue on the unit cube matches the separable oracle") {
    auto grid = Grid::box3d(20);
    LaplaceOperator op(grid);
    EigenPair eig = eigen_first(op);
    const double h = grid->h;
    // product-of-sines modes diagonalize the 7-point stencil exactly
    const double discrete = 3.0 * (2.0 - 2.0 * std::cos(M_PI * h)) / (h * h);
    CHECK(eig.lambda1 == Catch::Approx(discrete).epsilon(1e-9));
    CHECK(eig.lambda1 == Catch::Approx(3.0 * M_PI * M_PI).epsilon(5e-3));
    CHECK(min_value(eig.e1) > 0.0);
}

TEST_CASE("principal eigenvalue on the unit ball, N = 5, against the shooting oracle") {
    const double lam_shoot = oracles::shoot_ball_eigenvalue(5);
    // first zero of the radial Bessel problem: j_{3/2,1}^2
    CHECK(lam_shoot == Catch::Approx(20.1907285564).margin(1e-4));
    auto grid = Grid::radial(5, 512);
    LaplaceOperator op(grid);
    EigenPair eig = eigen_first(op);
    CHECK(eig.lambda1 == Catch::Approx(lam_shoot).margin(2e-3));
}

TEST_CASE("eigenvalue refinement order at least 1.9") {
    auto err_at = [](int M) {
        auto grid = Grid::radial(3, M);
        LaplaceOperator op(grid);
        return std::abs(eigen_first(op).lambda1 - M_PI * M_PI);
    };
    CHECK(std::log2(err_at(128) / err_at(256)) >= 1.9);
}

TEST_CASE("poisson solve against closed forms") {
    const int N = 3;
    auto grid = Grid::radial(N, 256);
    LaplaceOperator op(grid);
    const double lambda = 0.7;
    SECTION("constant load on the ball") {
        Field z = op.solve(Field(grid, lambda));
        double err = 0.0;
        for (int i = 0; i < z.size(); ++i) {
            const double exact = lambda * (1.0 - grid->r[i] * grid->r[i]) / (2.0 * N);
            err = std::max(err, std::abs(z.v[i] - exact));
        }
        // the flux form with exact cell volumes is exact on quadratics
        CHECK(err <= 1e-12 * lambda);
        // backward-stable residual: scaled by the operator and solution size
        const double scale = lambda + 4.0 / (grid->h * grid->h) * norm_inf(z);
        CHECK(op.residual_inf(z, Field(grid, lambda)) <= 1e-12 * scale);
    }
    SECTION("eigen relation") {
        EigenPair eig = eigen_first(op);
        Field back = op.solve(scaled(eig.e1, eig.lambda1));
        CHECK(diff_inf(back, eig.e1) <= 1e-6 * norm_inf(eig.e1));
    }
    SECTION("zero load") {
        CHECK(norm_inf(op.solve(Field(grid, 0.0))) == 0.0);
    }
}

TEST_CASE("discrete maximum principle on random nonnegative loads") {
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int N : {3, 4, 5}) {
        auto grid = Grid::radial(N, 64);
        LaplaceOperator op(grid);
        for (int trial = 0; trial < 100; ++trial) {
            Field rhs(grid);
            for (double& x : rhs.v) x = unif(eng);
            CHECK(min_value(op.solve(rhs)) >= 0.0);
        }
    }
    auto grid = Grid::box3d(16);
    LaplaceOperator op(grid);
    for (int trial = 0; trial < 20; ++trial) {
        Field rhs(grid);
        for (double& x : rhs.v) x = unif(eng);
        CHECK(min_value(op.solve(rhs)) >= 0.0);
    }
}

TEST_CASE("quadrature of the constant one recovers the ball volume") {
    for (int N : {3, 4, 5}) {
        auto grid = Grid::radial(N, 256);
        const double exact = std::pow(M_PI, N / 2.0) / std::tgamma(N / 2.0 + 1.0);
        CHECK(grid->total_volume() == Catch::Approx(exact).margin(1e-6));
    }
    CHECK(Grid::box3d(16)->total_volume() == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("norm properties") {
    auto grid = Grid::radial(3, 128);
    LaplaceOperator op(grid);
    Rng rng(11);
    SECTION("norms vanish exactly on the zero field") {
        Field z(grid);
        CHECK(h10_norm(z) == 0.0);
        CHECK(l2_norm(z) == 0.0);
        CHECK(l2star_norm(z) == 0.0);
    }
    SECTION("Cauchy-Schwarz on random fields") {
        for (int t = 0; t < 25; ++t) {
            Field u = smoothed_noise(op, rng), w = smoothed_noise(op, rng);
            CHECK(std::abs(h10_inner(u, w)) <= h10_norm(u) * h10_norm(w) * (1.0 + 1e-13));
            CHECK(std::abs(l2_inner(u, w)) <= l2_norm(u) * l2_norm(w) * (1.0 + 1e-13));
        }
    }
    SECTION("nonzero fields have positive norms") {
        Field u(grid);
        u.v[37] = 1e-8;
        CHECK(h10_norm(u) > 0.0);
        CHECK(l2_norm(u) > 0.0);
    }
}

TEST_CASE("grid invariants") {
    auto rad = Grid::radial(3, 64);
    CHECK(rad->h == Catch::Approx(1.0 / 63.0));
    CHECK(rad->n_interior == 63);
    CHECK(rad->r[0] == 0.0);
    auto box = Grid::box3d(16);
    CHECK(box->h == Catch::Approx(1.0 / 17.0));
    CHECK(box->n_interior == 16 * 16 * 16);
    CHECK_THROWS_AS(Grid::radial(3, 8), DomainError);
    CHECK_THROWS_AS(Grid::radial(2, 64), DomainError);
}
