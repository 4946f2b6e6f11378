#pragma once

#include <vector>

#include "fvdwr/estimator.hpp"
#include "fvdwr/mesh.hpp"
#include "fvdwr/newton.hpp"

namespace fvdwr {

// Bulk (Doerfler) marking: the smallest set, by greedy descending selection
// with ties broken by element index, whose indicators sum to at least
// theta times the total. All-zero indicators yield an empty set.
std::vector<int> mark_elements(const std::vector<double>& indicators, double theta);

struct AdaptiveOptions {
  int max_cycles = 5;
  double theta = 0.5;
  double goal_tolerance = 0.0;  // 0 disables the tolerance stop
  bool voronoi_fallback_to_donald = true;
  SolverOptions solver;
  SystemOptions system;
  DualMethod dual_method = DualMethod::galerkin;
};

struct AdaptiveCycle {
  int cycle = 0;
  int num_vertices = 0;
  int num_elements = 0;
  double h = 0.0;
  double goal_value = 0.0;
  double eta_T = 0.0, eta_m = 0.0, eta_nc = 0.0;
  double total_estimate = 0.0;
  double effectivity = 0.0;  // NaN when no reference available
  DualKind dual_kind = DualKind::voronoi;
  int newton_iterations = 0;
};

struct AdaptiveResult {
  std::vector<AdaptiveCycle> cycles;
  Mesh final_mesh;
  P1Field final_solution;
  P1Field final_dual;
  ErrorReport final_report;
  bool tolerance_reached = false;
  bool voronoi_invalidated = false;  // stopped because the dual kind became unavailable
};

// Solve -> dual -> recover -> estimate -> mark -> refine, until the estimate
// magnitude drops below the tolerance or the cycle budget is exhausted. After
// each refinement the Voronoi admissibility is re-checked; on failure the
// driver either switches to Donald diagrams (with a warning flag) or stops.
AdaptiveResult run_adaptive_loop(const Problem& problem, const GoalFunctional& goal,
                                 const Mesh& initial_mesh, DualKind kind,
                                 const UpwindScheme& scheme, const AdaptiveOptions& opts);

}  // namespace fvdwr
