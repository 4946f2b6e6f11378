#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fvdwr/estimator.hpp"
#include "fvdwr/newton.hpp"
#include "fvdwr/recovery.hpp"

using namespace fvdwr;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("recovery reproduces affine fields") {
  const Mesh mesh = friedrichs_keller(5);
  const P1Field v = interpolate(mesh, [](Vec2 x) { return 3.0 * x.x - 2.0 * x.y + 1.0; });
  for (PatchEvaluation mode : {PatchEvaluation::blended, PatchEvaluation::nearest_vertex}) {
    const RecoveredField rec = recover_higher_order(v, mode);
    CHECK_FALSE(rec.any_rank_deficient());
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const Vec2 p{uni(rng), uni(rng)};
      const int e = mesh.locate(p);
      REQUIRE(e >= 0);
      CHECK(std::abs(rec.evaluate(e, p) - (3.0 * p.x - 2.0 * p.y + 1.0)) < 1e-12);
      CHECK(std::abs(rec.diff_value(e, p)) < 1e-12);
      CHECK(norm(rec.diff_grad(e, p)) < 1e-11);
    }
  }
}

TEST_CASE("recovery reproduces quadratics where the data is quadratic") {
  const Mesh mesh = friedrichs_keller(6);
  const P1Field v = interpolate(mesh, [](Vec2 x) { return x.x * x.x; });
  for (PatchEvaluation mode : {PatchEvaluation::blended, PatchEvaluation::nearest_vertex}) {
    const RecoveredField rec = recover_higher_order(v, mode);
    // Recovered values at edge midpoints equal the exact parabola even though
    // the nodal interpolant underestimates there.
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.element(e);
      for (int k = 0; k < 3; ++k) {
        const Vec2 m = midpoint(mesh.vertex(t[k]), mesh.vertex(t[(k + 1) % 3]));
        CHECK(rec.evaluate(e, m) == doctest::Approx(m.x * m.x).epsilon(1e-11));
      }
    }
  }
}

TEST_CASE("recovered field agrees with the base at mesh vertices") {
  const Mesh mesh = friedrichs_keller(4);
  const P1Field v = interpolate(mesh, [](Vec2 x) { return std::sin(2.0 * x.x) + x.y * x.y; });
  for (PatchEvaluation mode : {PatchEvaluation::blended, PatchEvaluation::nearest_vertex}) {
    const RecoveredField rec = recover_higher_order(v, mode);
    for (int i = 0; i < mesh.num_vertices(); ++i) {
      const int e = mesh.vertex_star(i).front();
      CHECK(std::abs(rec.evaluate(e, mesh.vertex(i)) - v[i]) < 1e-13);
      CHECK(std::abs(rec.diff_value(e, mesh.vertex(i))) < 1e-13);
    }
  }
}

TEST_CASE("recovery difference shrinks at second order") {
  auto smooth = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  std::vector<double> worst;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  std::vector<Vec2> probes;
  for (int k = 0; k < 30; ++k) probes.push_back({uni(rng), uni(rng)});
  for (int n : {4, 8, 16, 32}) {
    const Mesh mesh = friedrichs_keller(n);
    const P1Field v = interpolate(mesh, smooth);
    const RecoveredField rec = recover_higher_order(v);
    double w = 0.0;
    for (const Vec2& p : probes) {
      const int e = mesh.locate(p);
      w = std::max(w, std::abs(rec.diff_value(e, p)));
    }
    worst.push_back(w);
  }
  for (std::size_t k = 0; k + 1 < worst.size(); ++k) {
    const double eoc = std::log2(worst[k] / worst[k + 1]);
    CAPTURE(k);
    CHECK(eoc >= 1.7);
  }
}

TEST_CASE("collinear stars fall back to a linear fit") {
  const Mesh mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
  const P1Field v = interpolate(mesh, [](Vec2 x) { return 2.0 * x.x + x.y; });
  const RecoveredField rec = recover_higher_order(v);
  CHECK(rec.any_rank_deficient());
  // The linear fallback still reproduces affine data.
  CHECK(rec.evaluate(0, {0.25, 0.25}) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("dual solve") {
  const UpwindScheme scheme = UpwindScheme::by_name("exponential");

  SUBCASE("self-adjoint problem with the load as goal weight") {
    // j(u) = <f, u> on the Poisson-type problem: the influence function is
    // the conforming primal solution of the same data.
    const Problem prob = make_problem("p0_polynomial");
    const GoalFunctional goal = make_goal("weighted_mean", "p0_load");
    const Mesh mesh = friedrichs_keller(8);
    const DualDiagram d = build_dual_diagram(mesh, DualKind::voronoi);
    DiscreteSystem fv(d, scheme, prob.reduced(), {});
    const P1Field u = solve_primal(fv, P1Field(mesh), {}, nullptr);
    const P1Field z = solve_dual(fv, u, goal);

    SystemOptions conf_opts;
    conf_opts.mode = DiscretizationMode::conforming;
    DiscreteSystem conforming(d, scheme, prob.reduced(), conf_opts);
    const P1Field u_conf = solve_primal(conforming, P1Field(mesh), {}, nullptr);
    for (int i = 0; i < z.size(); ++i) CHECK(std::abs(z[i] - u_conf[i]) < 1e-10);
  }
  SUBCASE("constant goal yields the zero influence function") {
    GoalFunctional constant;
    constant.name = "constant";
    constant.integrand = [](Vec2, double) { return 1.0; };
    constant.d_integrand = [](Vec2, double) { return 0.0; };
    const Problem prob = make_problem("p1_poisson");
    const Mesh mesh = friedrichs_keller(4);
    const DualDiagram d = build_dual_diagram(mesh, DualKind::voronoi);
    DiscreteSystem system(d, scheme, prob.reduced(), {});
    const P1Field u = solve_primal(system, P1Field(mesh), {}, nullptr);
    const P1Field z = solve_dual(system, u, constant);
    for (int i = 0; i < z.size(); ++i) CHECK(z[i] == 0.0);
  }
  SUBCASE("mean-value goal: dual orthogonality against every basis function") {
    const Problem prob = make_problem("p2_convdiff");
    const GoalFunctional goal = make_goal("mean_value");
    const Mesh mesh = friedrichs_keller(8);
    const DualDiagram d = build_dual_diagram(mesh, DualKind::voronoi);
    DiscreteSystem system(d, scheme, prob.reduced(), {});
    const P1Field u = solve_primal(system, P1Field(mesh), {}, nullptr);
    const P1Field z = solve_dual(system, u, goal);
    double scale = 1.0;
    for (int k = 0; k < system.num_unknowns(); ++k) {
      P1Field hat(mesh);
      const int i = system.unknown_vertices()[k];
      hat[i] = 1.0;
      const PointField w = PointField::from_p1(hat);
      // The right-hand side of the dual problem is the basis mass.
      const double ji = eval_goal_derivative(goal, u, w);
      scale = std::max(scale, std::abs(ji));
      const double rho_star = dual_residual(prob.reduced(), goal, u, z, w);
      CHECK(std::abs(rho_star) <= 1e-9 * scale);
    }
  }
  SUBCASE("finite-volume dual option solves the transposed system") {
    const Problem prob = make_problem("p2_convdiff");
    const GoalFunctional goal = make_goal("mean_value");
    const Mesh mesh = friedrichs_keller(4);
    const DualDiagram d = build_dual_diagram(mesh, DualKind::voronoi);
    DiscreteSystem system(d, scheme, prob.reduced(), {});
    const P1Field u = solve_primal(system, P1Field(mesh), {}, nullptr);
    const P1Field z = solve_dual(system, u, goal, DualMethod::finite_volume);
    const SpMat J = system.jacobian(u);
    Eigen::VectorXd rhs(system.num_unknowns());
    for (int k = 0; k < system.num_unknowns(); ++k) {
      P1Field hat(mesh);
      hat[system.unknown_vertices()[k]] = 1.0;
      rhs[k] = eval_goal_derivative(goal, u, PointField::from_p1(hat));
    }
    const Eigen::VectorXd res = SpMat(J.transpose()) * system.to_unknowns(z) - rhs;
    CHECK(res.lpNorm<Eigen::Infinity>() < 1e-9);
  }
}
