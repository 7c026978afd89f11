#pragma once

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <memory>
#include <stdexcept>

namespace swingpde {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sparse SPD solve behind one interface: direct Cholesky by default, a
/// conjugate-gradient fallback above `direct_limit` unknowns. Factorisations
/// are immutable after setup; solve() is safe to call concurrently.
class SpdSolver {
public:
    static constexpr int kDirectLimit = 100000;

    explicit SpdSolver(const Eigen::SparseMatrix<double>& matrix,
                       int direct_limit = kDirectLimit);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    bool direct() const { return ldlt_ != nullptr; }

private:
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
    std::unique_ptr<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                                             Eigen::Lower | Eigen::Upper>> cg_;
};

/// Solve A x = rhs for a symmetric positive semidefinite A whose null space
/// is the constant vector: the `ground` unknown is pinned to zero and the
/// remaining SPD system solved directly. The rhs must be consistent
/// (orthogonal to the null space). Residual checked against `rel_tol`
/// relative to |rhs|_inf, with one refinement pass before giving up.
Eigen::VectorXd solve_grounded_spd(const Eigen::SparseMatrix<double>& a,
                                   const Eigen::VectorXd& rhs, int ground,
                                   double rel_tol = 1e-9);

}  // namespace swingpde
