#include "fvdwr/study.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "fvdwr/errors.hpp"
#include "fvdwr/estimator.hpp"
#include "fvdwr/newton.hpp"
#include "fvdwr/quadrature.hpp"
#include "fvdwr/recovery.hpp"
#include "fvdwr/vtk_io.hpp"

namespace fvdwr {

namespace {

Mesh initial_mesh(const RunConfig& config) {
  if (!config.mesh_file.empty()) return load_mesh_file(config.mesh_file);
  return friedrichs_keller(config.mesh_n);
}

void require_admissible(const Mesh& mesh, DualKind kind) {
  const MeshValidation report = validate_primary_mesh(mesh, kind);
  if (!report.admissible_for(kind)) {
    std::ostringstream msg;
    msg << "mesh is not admissible for a Voronoi diagram";
    if (!report.not_self_centered.empty())
      msg << "; first non-self-centered element: " << report.not_self_centered.front();
    else if (!report.non_delaunay_edges.empty())
      msg << "; first non-Delaunay edge: (" << report.non_delaunay_edges.front()[0] << ","
          << report.non_delaunay_edges.front()[1] << ")";
    throw ValidationError(msg.str());
  }
}

void write_field_outputs(const RunConfig& config, const std::string& tag, const Mesh& mesh,
                         const P1Field& u, const P1Field& z, const ErrorReport& report) {
  if (!config.write_fields) return;
  const std::filesystem::path dir(config.output_dir);
  write_vtk((dir / ("fields_" + tag + ".vtk")).string(), mesh,
            {{"u_Tm", &u}, {"z_Tm", &z}},
            {{"indicator", &report.element_indicators},
             {"eta_T_part", &report.element_eta_T},
             {"eta_nc_part", &report.element_eta_nc},
             {"eta_m_part", &report.element_eta_m}});

  std::vector<std::vector<double>> rows;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    rows.push_back({static_cast<double>(e), report.element_eta_T[e], report.element_eta_nc[e],
                    report.element_eta_m[e], report.element_indicators[e]});
  }
  write_csv((dir / ("indicators_" + tag + ".csv")).string(),
            {"element", "eta_T_part", "eta_nc_part", "eta_m_part", "indicator"}, rows);
  write_report_text((dir / ("report_" + tag + ".txt")).string(), report);
}

double eoc(double coarse, double fine) { return std::log2(std::abs(coarse) / std::abs(fine)); }

}  // namespace

double l2_error_against(const P1Field& u, const std::function<double(Vec2)>& exact,
                        int quad_degree) {
  const Mesh& mesh = u.mesh();
  const TriangleRule& rule = triangle_rule(quad_degree);
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double diff = exact(q.x) - u.eval(e, q.x);
      s += q.w * diff * diff;
    }
  }
  return std::sqrt(s);
}

StudyResult run_convergence_study(const RunConfig& config) {
  const Problem problem = make_problem(config.problem, config.problem_params);
  if (!problem.has_exact)
    throw ConfigError("problem " + config.problem + " has no manufactured solution for a study");
  const GoalFunctional goal = make_goal(config.goal, config.goal_psi);
  const UpwindScheme scheme = UpwindScheme::by_name(config.scheme, config.scheme_m);

  std::filesystem::create_directories(config.output_dir);

  StudyResult result;
  result.reference_goal = reference_goal_value(problem, goal);

  Mesh mesh = initial_mesh(config);
  for (int level = 0; level < config.levels; ++level) {
    if (level > 0) {
      if (config.mesh_file.empty()) {
        // Regenerate with doubled resolution.
        mesh = friedrichs_keller(config.mesh_n * (1 << level));
      } else {
        // Two bisection sweeps halve the mesh width.
        mesh = refine_uniform(refine_uniform(mesh));
      }
    }
    require_admissible(mesh, config.dual);
    const DualDiagram diagram = build_dual_diagram(mesh, config.dual);
    DiscreteSystem system(diagram, scheme, problem.reduced(), config.system_options());

    ConvergenceLog log;
    const P1Field u = solve_primal(system, P1Field(mesh), config.solver, &log);
    const P1Field z = solve_dual(system, u, goal, config.dual_method);
    const RecoveredField z_rec = recover_higher_order(z);
    const RecoveredField u_rec = recover_higher_order(u);
    const ErrorReport report =
        assemble_error_report(system, problem.split, goal, u, z, recovery_weights(z_rec, u_rec));

    P1Field error(mesh);
    for (int i = 0; i < mesh.num_vertices(); ++i)
      error[i] = problem.exact_u(mesh.vertex(i)) - u[i];

    StudyRow row;
    row.level = level;
    row.n = config.mesh_file.empty() ? config.mesh_n * (1 << level) : 0;
    row.h = mesh.max_diameter();
    row.dofs = system.num_unknowns();
    row.err_xi = xi_norm(error, diagram);
    row.err_l2 = l2_error_against(u, problem.exact_u, config.quad_degree);
    row.j_error = result.reference_goal - report.goal_value;
    row.eta_T = report.eta_T;
    row.eta_m = report.eta_m;
    row.eta_nc = report.eta_nc;
    row.eta_l_sum = report.nc.eta_sum();
    row.goal_value = report.goal_value;
    row.newton_iterations = log.iterations;
    row.effectivity = std::nan("");
    try {
      row.effectivity = effectivity(report, result.reference_goal);
    } catch (const ZeroTrueError&) {
    }
    result.rows.push_back(row);

    write_field_outputs(config, "level" + std::to_string(level), mesh, u, z, report);
  }

  for (std::size_t k = 0; k + 1 < result.rows.size(); ++k) {
    const StudyRow& c = result.rows[k];
    const StudyRow& f = result.rows[k + 1];
    result.eoc_xi.push_back(eoc(c.err_xi, f.err_xi));
    result.eoc_l2.push_back(eoc(c.err_l2, f.err_l2));
    result.eoc_j.push_back(eoc(c.j_error, f.j_error));
    result.eoc_eta_l.push_back(eoc(c.eta_l_sum, f.eta_l_sum));
  }

  // study.csv: one row per level, EOC columns refer to the step from the
  // previous level (NaN on the first row).
  std::vector<std::vector<double>> csv_rows;
  for (std::size_t k = 0; k < result.rows.size(); ++k) {
    const StudyRow& r = result.rows[k];
    const double e_xi = k > 0 ? result.eoc_xi[k - 1] : std::nan("");
    const double e_l2 = k > 0 ? result.eoc_l2[k - 1] : std::nan("");
    const double e_j = k > 0 ? result.eoc_j[k - 1] : std::nan("");
    const double e_eta = k > 0 ? result.eoc_eta_l[k - 1] : std::nan("");
    csv_rows.push_back({static_cast<double>(r.level), static_cast<double>(r.n), r.h,
                        static_cast<double>(r.dofs), r.err_xi, e_xi, r.err_l2, e_l2, r.j_error,
                        e_j, r.eta_T, r.eta_m, r.eta_nc, r.eta_l_sum, e_eta, r.goal_value,
                        r.effectivity});
  }
  write_csv((std::filesystem::path(config.output_dir) / "study.csv").string(),
            {"level", "n", "h", "dofs", "err_xi", "eoc_xi", "err_l2", "eoc_l2", "j_error",
             "eoc_j", "eta_T", "eta_m", "eta_nc", "eta_l_sum", "eoc_eta_l", "goal_value",
             "effectivity"},
            csv_rows);
  return result;
}

namespace {

void print_study_table(const StudyResult& result, std::ostream& out) {
  out << std::setw(6) << "level" << std::setw(8) << "dofs" << std::setw(13) << "h"
      << std::setw(14) << "err_xi" << std::setw(8) << "eoc" << std::setw(14) << "j_error"
      << std::setw(14) << "eta_total" << std::setw(14) << "sum_eta_l" << std::setw(8) << "eoc"
      << std::setw(12) << "effectivity" << "\n";
  for (std::size_t k = 0; k < result.rows.size(); ++k) {
    const StudyRow& r = result.rows[k];
    auto fmt = [](double v) {
      std::ostringstream s;
      s << std::scientific << std::setprecision(3) << v;
      return s.str();
    };
    out << std::setw(6) << r.level << std::setw(8) << r.dofs << std::setw(13) << fmt(r.h)
        << std::setw(14) << fmt(r.err_xi)
        << std::setw(8)
        << (k > 0 ? (std::ostringstream{} << std::fixed << std::setprecision(2)
                                          << result.eoc_xi[k - 1])
                        .str()
                  : std::string("-"))
        << std::setw(14) << fmt(r.j_error) << std::setw(14)
        << fmt(r.eta_T + r.eta_m + r.eta_nc) << std::setw(14) << fmt(r.eta_l_sum)
        << std::setw(8)
        << (k > 0 ? (std::ostringstream{} << std::fixed << std::setprecision(2)
                                          << result.eoc_eta_l[k - 1])
                        .str()
                  : std::string("-"))
        << std::setw(12)
        << (std::isnan(r.effectivity)
                ? std::string("-")
                : (std::ostringstream{} << std::fixed << std::setprecision(3) << r.effectivity)
                      .str())
        << "\n";
  }
}

}  // namespace

VerifyResult run_verify_suite(const RunConfig& config) {
  VerifyResult result;
  auto add = [&](const std::string& name, bool pass, const std::string& detail = "") {
    result.checks.push_back({name, pass, detail});
    result.all_pass = result.all_pass && pass;
  };

  // Weighting-function properties.
  const std::vector<std::pair<std::string, double>> schemes = {
      {"exponential", -1.0}, {"full_upwind", -1.0}, {"piecewise_linear", 2.0}, {"step", 1.0},
      {"samarskij", -1.0},   {"tanh", -1.0},        {"ikeda", -1.0}};
  for (const auto& [name, m] : schemes) {
    const UpwindScheme scheme = UpwindScheme::by_name(name, m);
    const SchemeProperties props = verify_scheme_properties(scheme, config.seed);
    const bool core = props.all_core_pass();
    if (name == "step") {
      add("scheme/" + name + "/core+discontinuous", core && !props.lipschitz.pass,
          "expected the Lipschitz check to fail");
    } else {
      add("scheme/" + name + "/core", core, "");
    }
    add("scheme/" + name + "/reciprocity", props.reciprocity.pass, "");
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto random_field = [&](const Mesh& mesh, bool zero_boundary) {
    P1Field v(mesh);
    for (int i = 0; i < mesh.num_vertices(); ++i) v[i] = uni(rng);
    if (zero_boundary) v.zero_boundary();
    return v;
  };

  // Splitting identity and decomposition identity on small catalog runs.
  for (const char* pname_c : {"p1_poisson", "p2_convdiff", "p3_quasilinear"}) {
    const std::string pname(pname_c);
    const Problem problem = make_problem(pname);
    const GoalFunctional goal = make_goal("mean_value");
    for (DualKind kind : {DualKind::voronoi, DualKind::donald}) {
      const std::string tag =
          pname + "/" + (kind == DualKind::voronoi ? "voronoi" : "donald");
      const Mesh mesh = friedrichs_keller(8);
      const DualDiagram diagram = build_dual_diagram(mesh, kind);
      const UpwindScheme scheme = UpwindScheme::by_name(config.scheme, config.scheme_m);
      DiscreteSystem system(diagram, scheme, problem.reduced(), config.system_options());

      const P1Field w = random_field(mesh, true);
      const P1Field v = random_field(mesh, true);
      const double whole = system.apply_form(w, v);
      const double split = system.form_diffusion(w, v) + system.form_convective(w, v) +
                           system.form_reactive(w, v);
      const double scale = std::abs(whole) + std::abs(split) + 1e-30;
      add("splitting/" + tag, std::abs(whole - split) / scale < 1e-12, "");

      const auto parts = system.local_form_parts(w, v);
      double parts_sum = 0.0;
      for (double p : parts) parts_sum += p;
      add("localized-form/" + tag, std::abs(whole - parts_sum) / scale < 1e-10, "");

      const P1Field u = solve_primal(system, P1Field(mesh), config.solver, nullptr);
      const P1Field z = solve_dual(system, u, goal, config.dual_method);
      const NcDecomposition nc = compute_nc_decomposition(system, u, z);
      const double nc_scale = std::abs(nc.eta_nc) + std::abs(nc.delta0) + std::abs(nc.delta1) +
                              std::abs(nc.delta2) + std::abs(nc.delta3) + 1e-14;
      add("decomposition/" + tag, std::abs(nc.delta_sum() - nc.eta_nc) / nc_scale < 1e-8,
          "delta sum vs eta_nc");

      double rho_star_max = 0.0;
      double rhs_scale = 0.0;
      {
        const SpMat G = galerkin_linearization(problem.reduced(), system, u);
        Eigen::VectorXd jrhs(system.num_unknowns());
        for (int k = 0; k < system.num_unknowns(); ++k) {
          P1Field hat(mesh);
          hat[system.unknown_vertices()[k]] = 1.0;
          jrhs[k] = eval_goal_derivative(goal, u, PointField::from_p1(hat), config.quad_degree);
        }
        const Eigen::VectorXd zz = system.to_unknowns(z);
        const Eigen::VectorXd res = jrhs - G.transpose() * zz;
        rho_star_max = res.lpNorm<Eigen::Infinity>();
        rhs_scale = std::max(1.0, jrhs.lpNorm<Eigen::Infinity>());
      }
      if (config.dual_method == DualMethod::galerkin)
        add("dual-orthogonality/" + tag, rho_star_max <= 1e-9 * rhs_scale, "");
    }
  }

  // Recovery reproduction.
  {
    const Mesh mesh = friedrichs_keller(6);
    const P1Field affine = interpolate(mesh, [](Vec2 x) { return 3.0 * x.x - 2.0 * x.y + 1.0; });
    const RecoveredField rec = recover_higher_order(affine);
    double worst = 0.0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const Vec2 p{unit(rng), unit(rng)};
      const int e = mesh.locate(p);
      if (e < 0) continue;
      const double exact = 3.0 * p.x - 2.0 * p.y + 1.0;
      worst = std::max(worst, std::abs(rec.evaluate(e, p) - exact));
    }
    add("recovery/affine-reproduction", worst < 1e-12, "");
  }

  return result;
}

AdaptiveResult run_adaptive_study(const RunConfig& config) {
  const Problem problem = make_problem(config.problem, config.problem_params);
  const GoalFunctional goal = make_goal(config.goal, config.goal_psi);
  const UpwindScheme scheme = UpwindScheme::by_name(config.scheme, config.scheme_m);
  const Mesh mesh = initial_mesh(config);
  require_admissible(mesh, config.dual);

  std::filesystem::create_directories(config.output_dir);
  AdaptiveResult result =
      run_adaptive_loop(problem, goal, mesh, config.dual, scheme, config.adaptive_options());

  std::vector<std::vector<double>> rows;
  for (const AdaptiveCycle& c : result.cycles) {
    rows.push_back({static_cast<double>(c.cycle), static_cast<double>(c.num_vertices),
                    static_cast<double>(c.num_elements), c.goal_value, c.eta_T, c.eta_m, c.eta_nc,
                    c.total_estimate, c.effectivity});
  }
  write_csv((std::filesystem::path(config.output_dir) / "study.csv").string(),
            {"cycle", "vertices", "elements", "goal_value", "eta_T", "eta_m", "eta_nc", "total",
             "effectivity"},
            rows);

  write_field_outputs(config, "final", result.final_mesh, result.final_solution,
                      result.final_dual, result.final_report);
  if (config.write_diagram) {
    const DualDiagram diagram = build_dual_diagram(
        result.final_mesh, result.cycles.empty() ? config.dual : result.cycles.back().dual_kind);
    write_diagram_vtk((std::filesystem::path(config.output_dir) / "diagram_final.vtk").string(),
                      diagram);
  }
  return result;
}

int run_from_config(const RunConfig& config, std::ostream& out) {
  try {
    if (config.mode == RunMode::verify) {
      const VerifyResult result = run_verify_suite(config);
      for (const VerifyCheck& check : result.checks) {
        out << (check.pass ? "PASS " : "FAIL ") << check.name;
        if (!check.pass && !check.detail.empty()) out << "  (" << check.detail << ")";
        out << "\n";
      }
      out << (result.all_pass ? "all checks passed\n" : "some checks FAILED\n");
      return result.all_pass ? 0 : 3;
    }
    if (config.mode == RunMode::uniform) {
      const StudyResult result = run_convergence_study(config);
      print_study_table(result, out);
      out << "reference goal value: " << format_double(result.reference_goal) << "\n";
      out << "outputs written to " << config.output_dir << "\n";
      return 0;
    }
    const AdaptiveResult result = run_adaptive_study(config);
    auto fmt = [](double v) {
      std::ostringstream s;
      s << std::scientific << std::setprecision(4) << v;
      return s.str();
    };
    out << std::setw(6) << "cycle" << std::setw(10) << "vertices" << std::setw(10) << "elements"
        << std::setw(15) << "goal" << std::setw(15) << "total_est" << std::setw(12)
        << "effectivity" << "\n";
    for (const AdaptiveCycle& c : result.cycles) {
      out << std::setw(6) << c.cycle << std::setw(10) << c.num_vertices << std::setw(10)
          << c.num_elements << std::setw(15) << fmt(c.goal_value) << std::setw(15)
          << fmt(c.total_estimate) << std::setw(12)
          << (std::isnan(c.effectivity)
                  ? std::string("-")
                  : (std::ostringstream{} << std::fixed << std::setprecision(3) << c.effectivity)
                        .str())
          << "\n";
    }
    if (result.voronoi_invalidated)
      out << "stopped: refinement invalidated the Voronoi diagram (fallback disabled)\n";
    out << "outputs written to " << config.output_dir << "\n";
    return 0;
  } catch (const ConfigError& err) {
    out << "config error: " << err.what() << "\n";
    return 2;
  } catch (const ValidationError& err) {
    out << "validation error: " << err.what() << "\n";
    return 4;
  } catch (const Error& err) {
    out << "numerical error: " << err.what() << "\n";
    return 3;
  }
}

}  // namespace fvdwr
