#pragma once

#include <map>
#include <optional>
#include <string>

#include "fvdwr/adaptivity.hpp"
#include "fvdwr/assembly.hpp"
#include "fvdwr/mesh.hpp"

namespace fvdwr {

enum class RunMode { uniform, adaptive, verify };

// Run configuration: sectioned key = value text, unknown keys rejected.
// Command-line flags override file values.
struct RunConfig {
  // [run]
  RunMode mode = RunMode::uniform;
  std::string problem = "p1_poisson";
  std::string goal = "mean_value";
  std::string goal_psi = "bump";
  DualKind dual = DualKind::voronoi;
  std::string scheme = "exponential";
  double scheme_m = -1.0;  // scheme default when negative
  DiscretizationMode discretization = DiscretizationMode::finite_volume;
  DualMethod dual_method = DualMethod::galerkin;
  DivfreeVariant divfree = DivfreeVariant::automatic;
  int quad_degree = 5;
  int mesh_n = 8;
  std::string mesh_file;  // overrides the generator when nonempty
  int levels = 4;
  unsigned seed = 0;

  // [problem]
  std::map<std::string, double> problem_params;

  // [solver]
  SolverOptions solver;

  // [adaptive]
  int max_cycles = 5;
  double theta = 0.5;
  double goal_tolerance = 0.0;
  bool voronoi_fallback = true;

  // [output]
  std::string output_dir = "out";
  bool write_fields = true;
  bool write_diagram = false;

  SystemOptions system_options() const {
    return {discretization, divfree, quad_degree};
  }
  AdaptiveOptions adaptive_options() const {
    AdaptiveOptions a;
    a.max_cycles = max_cycles;
    a.theta = theta;
    a.goal_tolerance = goal_tolerance;
    a.voronoi_fallback_to_donald = voronoi_fallback;
    a.solver = solver;
    a.system = system_options();
    a.dual_method = dual_method;
    return a;
  }
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Apply one "section.key=value" override (CLI flags).
void apply_override(RunConfig& config, const std::string& dotted_key, const std::string& value);

}  // namespace fvdwr
