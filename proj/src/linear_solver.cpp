#include "swingpde/linear_solver.hpp"

#include <cmath>

namespace swingpde {

SpdSolver::SpdSolver(const Eigen::SparseMatrix<double>& matrix, int direct_limit) {
    if (matrix.rows() != matrix.cols()) throw SolverError("matrix must be square");
    if (matrix.rows() <= direct_limit) {
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        ldlt_->compute(matrix);
        if (ldlt_->info() != Eigen::Success)
            throw SolverError("sparse Cholesky factorization failed");
    } else {
        cg_ = std::make_unique<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                                        Eigen::Lower | Eigen::Upper>>();
        cg_->setTolerance(1e-12);
        cg_->compute(matrix);
        if (cg_->info() != Eigen::Success)
            throw SolverError("iterative solver setup failed");
    }
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x;
    if (ldlt_) {
        x = ldlt_->solve(rhs);
        if (ldlt_->info() != Eigen::Success) throw SolverError("direct solve failed");
    } else {
        x = cg_->solve(rhs);
        if (cg_->info() != Eigen::Success)
            throw SolverError("iterative solve did not converge");
    }
    return x;
}

Eigen::VectorXd solve_grounded_spd(const Eigen::SparseMatrix<double>& a,
                                   const Eigen::VectorXd& rhs, int ground,
                                   double rel_tol) {
    const int n = static_cast<int>(a.rows());
    if (ground < 0 || ground >= n) throw SolverError("ground index out of range");
    if (n == 1) return Eigen::VectorXd::Zero(1);

    // Principal submatrix with the grounded unknown removed.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(a.nonZeros()));
    for (int c = 0; c < a.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) {
            int r = static_cast<int>(it.row());
            if (r == ground || c == ground) continue;
            trips.emplace_back(r < ground ? r : r - 1, c < ground ? c : c - 1, it.value());
        }
    Eigen::SparseMatrix<double> reduced(n - 1, n - 1);
    reduced.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd rhs_red(n - 1);
    for (int i = 0, r = 0; i < n; ++i)
        if (i != ground) rhs_red[r++] = rhs[i];

    SpdSolver solver(reduced);
    Eigen::VectorXd x_red = solver.solve(rhs_red);

    auto expand = [&](const Eigen::VectorXd& xr) {
        Eigen::VectorXd x(n);
        for (int i = 0, r = 0; i < n; ++i) x[i] = (i == ground) ? 0.0 : xr[r++];
        return x;
    };

    Eigen::VectorXd x = expand(x_red);
    const double rhs_scale = rhs.lpNorm<Eigen::Infinity>();
    double resid = (a * x - rhs).lpNorm<Eigen::Infinity>();
    if (resid > rel_tol * std::max(rhs_scale, 1e-300)) {
        // One refinement pass before reporting failure.
        Eigen::VectorXd r_full = rhs - a * x;
        Eigen::VectorXd r_red(n - 1);
        for (int i = 0, r = 0; i < n; ++i)
            if (i != ground) r_red[r++] = r_full[i];
        x += expand(solver.solve(r_red));
        resid = (a * x - rhs).lpNorm<Eigen::Infinity>();
        if (resid > rel_tol * std::max(rhs_scale, 1e-300))
            throw SolverError("grounded solve residual " + std::to_string(resid) +
                              " exceeds tolerance; system may be inconsistent");
    }
    return x;
}

}  // namespace swingpde
