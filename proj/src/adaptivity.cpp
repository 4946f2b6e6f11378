#include "fvdwr/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fvdwr/errors.hpp"
#include "fvdwr/newton.hpp"

namespace fvdwr {

std::vector<int> mark_elements(const std::vector<double>& indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("marking parameter theta must be in (0,1]");
  for (double v : indicators)
    if (v < 0.0) throw ValidationError("negative element indicator");

  double total = 0.0;
  for (double v : indicators) total += v;
  if (total <= 0.0) return {};

  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (indicators[a] != indicators[b]) return indicators[a] > indicators[b];
    return a < b;
  });

  std::vector<int> marked;
  double sum = 0.0;
  const double target = theta * total;
  for (int e : order) {
    if (sum >= target || indicators[e] == 0.0) break;
    marked.push_back(e);
    sum += indicators[e];
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

AdaptiveResult run_adaptive_loop(const Problem& problem, const GoalFunctional& goal,
                                 const Mesh& initial_mesh, DualKind kind,
                                 const UpwindScheme& scheme, const AdaptiveOptions& opts) {
  Mesh mesh = initial_mesh;
  DualKind active_kind = kind;
  P1Field warm_start;
  bool have_warm_start = false;
  std::vector<std::array<int, 2>> parents;

  AdaptiveResult result{.cycles = {},
                        .final_mesh = mesh,
                        .final_solution = {},
                        .final_dual = {},
                        .final_report = {},
                        .tolerance_reached = false,
                        .voronoi_invalidated = false};

  double reference = std::nan("");
  if (problem.has_exact) reference = reference_goal_value(problem, goal);

  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    const DualDiagram diagram = build_dual_diagram(mesh, active_kind);
    DiscreteSystem system(diagram, scheme, problem.reduced(), opts.system);

    P1Field initial = have_warm_start ? warm_start : P1Field(mesh);
    ConvergenceLog log;
    const P1Field u = solve_primal(system, initial, opts.solver, &log);
    const P1Field z = solve_dual(system, u, goal, opts.dual_method);

    const RecoveredField z_rec = recover_higher_order(z);
    const RecoveredField u_rec = recover_higher_order(u);
    ErrorReport report =
        assemble_error_report(system, problem.split, goal, u, z, recovery_weights(z_rec, u_rec));

    AdaptiveCycle row;
    row.cycle = cycle;
    row.num_vertices = mesh.num_vertices();
    row.num_elements = mesh.num_elements();
    row.h = mesh.max_diameter();
    row.goal_value = report.goal_value;
    row.eta_T = report.eta_T;
    row.eta_m = report.eta_m;
    row.eta_nc = report.eta_nc;
    row.total_estimate = report.total();
    row.dual_kind = active_kind;
    row.newton_iterations = log.iterations;
    row.effectivity = std::nan("");
    if (!std::isnan(reference)) {
      try {
        row.effectivity = effectivity(report, reference);
      } catch (const ZeroTrueError&) {
      }
    }
    result.cycles.push_back(row);
    // Rebind the kept fields to the mesh stored inside the result so they
    // stay valid after the loop-local mesh is replaced.
    result.final_mesh = mesh;
    result.final_solution = P1Field(result.final_mesh, u.values());
    result.final_dual = P1Field(result.final_mesh, z.values());
    result.final_report = std::move(report);

    if (opts.goal_tolerance > 0.0 &&
        std::abs(result.final_report.total()) <= opts.goal_tolerance) {
      result.tolerance_reached = true;
      break;
    }
    if (cycle + 1 == opts.max_cycles) break;

    const std::vector<int> marked =
        mark_elements(result.final_report.element_indicators, opts.theta);
    if (marked.empty()) break;

    Mesh refined = refine_mesh(mesh, marked, &parents);
    if (active_kind == DualKind::voronoi) {
      const MeshValidation check = validate_primary_mesh(refined, DualKind::voronoi);
      if (!check.admissible_for(DualKind::voronoi)) {
        if (opts.voronoi_fallback_to_donald) {
          active_kind = DualKind::donald;
        } else {
          result.voronoi_invalidated = true;
          break;
        }
      }
    }

    // Prolongate the solution as the warm start on the refined mesh; parents
    // always precede their midpoints, so one ascending sweep interpolates.
    std::vector<double> warm(refined.num_vertices());
    for (int i = 0; i < refined.num_vertices(); ++i) {
      const auto [p0, p1] = std::pair(parents[i][0], parents[i][1]);
      warm[i] = p0 == p1 ? u[p0] : 0.5 * (warm[p0] + warm[p1]);
    }
    mesh = std::move(refined);
    warm_start = P1Field(mesh, std::move(warm));
    warm_start.zero_boundary();
    have_warm_start = true;
  }
  return result;
}

}  // namespace fvdwr
