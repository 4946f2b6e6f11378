#pragma once

#include <string>
#include <vector>

#include "fvdwr/adaptivity.hpp"
#include "fvdwr/config.hpp"

namespace fvdwr {

struct StudyRow {
  int level = 0;
  int n = 0;  // generator parameter, 0 for file meshes
  double h = 0.0;
  int dofs = 0;
  double err_xi = 0.0;
  double err_l2 = 0.0;
  double j_error = 0.0;
  double eta_T = 0.0, eta_m = 0.0, eta_nc = 0.0, eta_l_sum = 0.0;
  double goal_value = 0.0;
  double effectivity = 0.0;  // NaN when undefined
  int newton_iterations = 0;
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double reference_goal = 0.0;
  // EOC between consecutive levels (log2 ratios); entry k compares rows k and k+1.
  std::vector<double> eoc_xi, eoc_l2, eoc_j, eoc_eta_l;
};

// Uniform refinement study with error, estimator and EOC columns; writes
// study.csv, a human-readable table and optional field files into the output
// directory.
StudyResult run_convergence_study(const RunConfig& config);

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyResult {
  std::vector<VerifyCheck> checks;
  bool all_pass = true;
};

// Invariant suite: weighting-function properties, scaling relation, splitting
// identity, decomposition identity, dual orthogonality, recovery
// reproduction. Randomized inputs are seeded from the config.
VerifyResult run_verify_suite(const RunConfig& config);

// Adaptive driver with cycle summaries appended to study.csv.
AdaptiveResult run_adaptive_study(const RunConfig& config);

// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 validation failure.
int run_from_config(const RunConfig& config, std::ostream& out);

double l2_error_against(const P1Field& u, const std::function<double(Vec2)>& exact,
                        int quad_degree = 5);

}  // namespace fvdwr
