#include "fvdwr/newton.hpp"

#include <Eigen/SparseLU>
#include <cmath>

#include "fvdwr/errors.hpp"

namespace fvdwr {

Eigen::VectorXd sparse_solve(const SpMat& A, const Eigen::VectorXd& b) {
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SolverError(SolverError::Kind::singular_jacobian, "sparse factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  const double res = (A * x - b).lpNorm<Eigen::Infinity>();
  const double bound = 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>());
  if (!(res <= bound))
    throw SolverError(SolverError::Kind::linear_residual,
                      "linear solve residual " + std::to_string(res) + " exceeds bound");
  return x;
}

P1Field solve_primal(const DiscreteSystem& system, const P1Field& initial,
                     const SolverOptions& opts, ConvergenceLog* log) {
  P1Field u = initial;
  Eigen::VectorXd F = system.residual(u);
  double norm0 = F.lpNorm<Eigen::Infinity>();
  if (log) {
    log->residual_norms = {norm0};
    log->iterations = 0;
    log->converged = false;
  }
  if (norm0 <= opts.atol) {
    if (log) log->converged = true;
    return u;
  }

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const SpMat J = system.jacobian(u);
    Eigen::VectorXd step;
    try {
      step = sparse_solve(J, -F);
    } catch (const SolverError& err) {
      if (err.kind() == SolverError::Kind::singular_jacobian)
        throw SolverError(SolverError::Kind::singular_jacobian,
                          "singular Jacobian at iterate " + std::to_string(it - 1));
      throw;
    }

    const double phi0 = F.squaredNorm();
    double lambda = 1.0;
    P1Field u_trial = u;
    Eigen::VectorXd F_trial;
    bool accepted = false;
    for (int halving = 0; halving <= 20; ++halving) {
      for (int k = 0; k < system.num_unknowns(); ++k)
        u_trial[system.unknown_vertices()[k]] = u[system.unknown_vertices()[k]] + lambda * step[k];
      F_trial = system.residual(u_trial);
      const double phi = F_trial.squaredNorm();
      if (!opts.damping || phi <= (1.0 - 2e-4 * lambda) * phi0) {
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted)
      throw SolverError(SolverError::Kind::line_search_stall,
                        "line search stalled at iterate " + std::to_string(it));

    u = u_trial;
    F = F_trial;
    const double norm = F.lpNorm<Eigen::Infinity>();
    if (log) {
      log->residual_norms.push_back(norm);
      log->iterations = it;
    }
    if (norm <= opts.atol || norm <= opts.rtol * norm0) {
      if (log) log->converged = true;
      return u;
    }
  }
  throw SolverError(SolverError::Kind::max_iterations,
                    "Newton did not converge within " + std::to_string(opts.max_iterations) +
                        " iterations");
}

}  // namespace fvdwr
