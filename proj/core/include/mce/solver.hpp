#pragma once

#include <memory>

#include <Eigen/Sparse>

#include "mce/forms.hpp"

namespace mce {

struct SolveReport {
    Eigen::VectorXd solution;
    double relative_residual = 0.0;  ///< ||A x - b|| / ||b|| (absolute when b = 0)
    double log_abs_determinant = 0.0;
    /// Lower bound on the 1-norm condition number from random inverse probes.
    double condition_estimate = 0.0;
    int refinement_steps = 0;
    double wall_seconds = 0.0;
};

/// Sparse LU with partial pivoting and a COLAMD fill-reducing ordering; handles the
/// symmetric indefinite saddle point systems as well as the non-symmetric slip variant.
class DirectSolver {
public:
    /// Factorizes the system. Throws SolverError naming the block that carries the
    /// (near) null space when the matrix is singular.
    explicit DirectSolver(const SaddleSystem& system);
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    SolveReport solve() const;
    /// Up to `rounds` residual corrections starting from x0; the returned residual
    /// never exceeds that of x0.
    SolveReport refine(const Eigen::VectorXd& x0, int rounds = 3) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SolveReport solve(const SaddleSystem& system);
SolveReport refine_iteratively(const SaddleSystem& system, const Eigen::VectorXd& x0);

}  // namespace mce
