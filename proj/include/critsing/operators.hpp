#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "critsing/grid.hpp"
#include "critsing/quadrature.hpp"

namespace critsing {

namespace detail {

/// Tridiagonal solve with partial pivoting (LAPACK gtsv scheme). Bands are
/// copied; dl/d/du index rows, dl[0] and du[n-1] unused.
inline std::vector<double> tridiag_solve_pivot(std::vector<double> dl,
                                               std::vector<double> d,
                                               std::vector<double> du,
                                               std::vector<double> b) {
    const int n = static_cast<int>(d.size());
    std::vector<double> du2(n, 0.0);
    for (int i = 0; i < n - 1; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i + 1])) {
            if (d[i] == 0.0) throw SingularSystemError("tridiagonal pivot is zero");
            const double fact = dl[i + 1] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            const double fact = d[i] / dl[i + 1];
            d[i] = dl[i + 1];
            const double tmp = d[i + 1];
            d[i + 1] = du[i] - fact * tmp;
            if (i < n - 2) {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = tmp;
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= fact * b[i];
        }
    }
    if (d[n - 1] == 0.0) throw SingularSystemError("tridiagonal pivot is zero");
    std::vector<double> x(n);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n > 1) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (int i = n - 3; i >= 0; --i)
        x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    return x;
}

}  // namespace detail

/// Discrete -Delta with homogeneous Dirichlet data, in flux (conservative)
/// form so the operator is exactly self-adjoint in the cell-volume inner
/// product and h10_inner is its Dirichlet form. The origin node of the radial
/// grid reduces to the symmetric stencil 2N (u_0 - u_1)/h^2.
class LaplaceOperator {
public:
    explicit LaplaceOperator(std::shared_ptr<const Grid> grid) : grid_(std::move(grid)) {
        const Grid& g = *grid_;
        if (g.kind == DomainKind::RadialBall) {
            const int n = g.n_interior;
            sub_.assign(n, 0.0);
            diag_.assign(n, 0.0);
            sup_.assign(n, 0.0);
            for (int i = 0; i < n; ++i) {
                const double sl = (i == 0) ? 0.0 : g.edge_coeff[i - 1];
                const double su = g.edge_coeff[i];
                const double scale = 1.0 / (g.h * g.vol1d[i]);
                diag_[i] = (sl + su) * scale;
                if (i > 0) sub_[i] = -sl * scale;
                if (i < n - 1) sup_[i] = -su * scale;
            }
        } else {
            build_box_matrix();
            ldlt_.compute(box_matrix_);
            if (ldlt_.info() != Eigen::Success)
                throw SingularSystemError("box Laplacian factorization failed");
        }
    }

    const std::shared_ptr<const Grid>& grid() const { return grid_; }

    /// Max row sum of the operator, the scale of its round-off floor.
    double row_norm_inf() const {
        const Grid& g = *grid_;
        if (g.kind == DomainKind::Box3D) return 12.0 / (g.h * g.h);
        double m = 0.0;
        for (int i = 0; i < g.n_interior; ++i)
            m = std::max(m, std::abs(diag_[i]) + std::abs(sub_[i]) + std::abs(sup_[i]));
        return m;
    }

    /// Applies -Delta to a field.
    Field apply(const Field& u) const {
        const Grid& g = *grid_;
        Field out(grid_);
        if (g.kind == DomainKind::RadialBall) {
            const int n = g.n_interior;
            for (int i = 0; i < n; ++i) {
                double s = diag_[i] * u.v[i];
                if (i > 0) s += sub_[i] * u.v[i - 1];
                if (i < n - 1) s += sup_[i] * u.v[i + 1];
                out.v[i] = s;
            }
        } else {
            const int m = g.M;
            const double ih2 = 1.0 / (g.h * g.h);
            for (int k = 0; k < m; ++k)
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i) {
                        const int idx = g.box_index(i, j, k);
                        double s = 6.0 * u.v[idx];
                        if (i > 0) s -= u.v[g.box_index(i - 1, j, k)];
                        if (i < m - 1) s -= u.v[g.box_index(i + 1, j, k)];
                        if (j > 0) s -= u.v[g.box_index(i, j - 1, k)];
                        if (j < m - 1) s -= u.v[g.box_index(i, j + 1, k)];
                        if (k > 0) s -= u.v[g.box_index(i, j, k - 1)];
                        if (k < m - 1) s -= u.v[g.box_index(i, j, k + 1)];
                        out.v[idx] = s * ih2;
                    }
        }
        return out;
    }

    /// Solves -Delta u = rhs with zero boundary trace (direct solve).
    Field solve(const Field& rhs) const {
        if (grid_->kind == DomainKind::RadialBall)
            return solve_shifted(std::vector<double>(grid_->n_interior, 0.0), rhs);
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.v.data(), rhs.size());
        Eigen::VectorXd x = ldlt_.solve(b);
        Field out(grid_);
        Eigen::Map<Eigen::VectorXd>(out.v.data(), out.size()) = x;
        return out;
    }

    /// Solves (-Delta + diag(shift)) u = rhs; the Newton solvers feed their
    /// linearized diagonal here. The shift may be indefinite.
    Field solve_shifted(const std::vector<double>& shift, const Field& rhs) const {
        const Grid& g = *grid_;
        Field out(grid_);
        if (g.kind == DomainKind::RadialBall) {
            std::vector<double> d = diag_;
            for (int i = 0; i < g.n_interior; ++i) d[i] += shift[i];
            out.v = detail::tridiag_solve_pivot(sub_, d, sup_, rhs.v);
            return out;
        }
        Eigen::SparseMatrix<double> A = box_matrix_;
        for (int i = 0; i < g.n_interior; ++i) A.coeffRef(i, i) += shift[i];
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success)
            throw SingularSystemError("shifted box solve failed");
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.v.data(), rhs.size());
        Eigen::VectorXd x = lu.solve(b);
        Eigen::Map<Eigen::VectorXd>(out.v.data(), out.size()) = x;
        return out;
    }

    /// Max-norm residual of a computed solve, ||A u - rhs||_inf.
    double residual_inf(const Field& u, const Field& rhs) const {
        Field Au = apply(u);
        double m = 0.0;
        for (int i = 0; i < u.size(); ++i) m = std::max(m, std::abs(Au.v[i] - rhs.v[i]));
        return m;
    }

private:
    void build_box_matrix() {
        const Grid& g = *grid_;
        const int m = g.M;
        const double ih2 = 1.0 / (g.h * g.h);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(7) * g.n_interior);
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) {
                    const int idx = g.box_index(i, j, k);
                    trip.emplace_back(idx, idx, 6.0 * ih2);
                    auto off = [&](int ii, int jj, int kk) {
                        if (ii >= 0 && jj >= 0 && kk >= 0 && ii < m && jj < m && kk < m)
                            trip.emplace_back(idx, g.box_index(ii, jj, kk), -ih2);
                    };
                    off(i - 1, j, k); off(i + 1, j, k);
                    off(i, j - 1, k); off(i, j + 1, k);
                    off(i, j, k - 1); off(i, j, k + 1);
                }
        box_matrix_.resize(g.n_interior, g.n_interior);
        box_matrix_.setFromTriplets(trip.begin(), trip.end());
        box_matrix_.makeCompressed();
    }

    std::shared_ptr<const Grid> grid_;
    std::vector<double> sub_, diag_, sup_;
    Eigen::SparseMatrix<double> box_matrix_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

/// Principal Dirichlet eigenpair of -Delta.
struct EigenPair {
    double lambda1;
    Field e1;  ///< positive interior values, sup-normalized below 1
};

/// Inverse power iteration; the eigenfunction is positive (the solve is
/// inverse-positive) and sup-normalized to sup_target < 1.
inline EigenPair eigen_first(const LaplaceOperator& op, double sup_target = 0.5,
                             double rel_tol = 1e-10, int max_iter = 10000) {
    if (!(sup_target > 0.0 && sup_target < 1.0))
        throw DomainError("eigen_first: sup_target must lie in (0,1)");
    Field x(op.grid(), 1.0);
    double lam_old = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Field y = op.solve(x);
        const double nrm = l2_norm(y);
        if (!(nrm > 0.0)) throw ConvergenceError("eigen_first: iterate collapsed");
        for (double& t : y.v) t /= nrm;
        Field Ay = op.apply(y);
        const double lam = l2_inner(Ay, y) / l2_inner(y, y);
        double vec_res = 0.0;
        for (int i = 0; i < y.size(); ++i)
            vec_res = std::max(vec_res, std::abs(Ay.v[i] - lam * y.v[i]));
        x = y;
        if (it > 0 && std::abs(lam - lam_old) <= rel_tol * std::abs(lam) &&
            vec_res <= 100.0 * rel_tol * lam * norm_inf(y)) {
            const double scale = sup_target / max_value(x);
            for (double& t : x.v) t *= scale;
            return {lam, x};
        }
        lam_old = lam;
    }
    throw ConvergenceError("eigen_first: inverse power iteration did not converge");
}

}  // namespace critsing
