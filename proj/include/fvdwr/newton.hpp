#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "fvdwr/assembly.hpp"
#include "fvdwr/field.hpp"

namespace fvdwr {

struct SolverOptions {
  double atol = 1e-10;
  double rtol = 1e-12;
  int max_iterations = 50;
  bool damping = true;
};

struct ConvergenceLog {
  std::vector<double> residual_norms;  // max-norm per iterate, starting at the initial guess
  int iterations = 0;
  bool converged = false;
};

// Sparse direct solve with a post-solve residual check
// |Ax - b|_inf <= 1e-9 (1 + |b|_inf).
Eigen::VectorXd sparse_solve(const SpMat& A, const Eigen::VectorXd& b);

// Damped Newton iteration for F(u) = 0 with backtracking line search
// (halving, at most 20 halvings, sufficient decrease on |F|^2).
P1Field solve_primal(const DiscreteSystem& system, const P1Field& initial,
                     const SolverOptions& opts = {}, ConvergenceLog* log = nullptr);

}  // namespace fvdwr
