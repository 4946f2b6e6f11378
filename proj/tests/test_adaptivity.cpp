#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fvdwr/adaptivity.hpp"
#include "fvdwr/errors.hpp"

using namespace fvdwr;

TEST_CASE("bulk marking") {
  SUBCASE("theta = 1 selects every element with a nonzero indicator") {
    const std::vector<double> ind{0.5, 0.0, 1.5, 0.25, 0.0};
    const auto marked = mark_elements(ind, 1.0);
    CHECK(marked == std::vector<int>{0, 2, 3});
  }
  SUBCASE("equal indicators select the ceiling of the fraction") {
    for (int n : {4, 5, 9}) {
      const std::vector<double> ind(n, 3.7);
      const auto marked = mark_elements(ind, 0.5);
      CHECK(static_cast<int>(marked.size()) == (n + 1) / 2);
    }
  }
  SUBCASE("greedy selection on a hand-worked example") {
    // 4 + 2 = 6 >= 0.7 * 8 = 5.6.
    const auto marked = mark_elements({4.0, 2.0, 1.0, 1.0}, 0.7);
    CHECK(marked == std::vector<int>{0, 1});
  }
  SUBCASE("invariant under uniform scaling") {
    const std::vector<double> ind{0.3, 1.1, 0.2, 0.9, 0.05, 0.45};
    std::vector<double> scaled = ind;
    for (double& v : scaled) v *= 137.5;
    CHECK(mark_elements(ind, 0.6) == mark_elements(scaled, 0.6));
  }
  SUBCASE("deterministic tie break by element index") {
    const auto marked = mark_elements({1.0, 1.0, 1.0, 1.0}, 0.25);
    CHECK(marked == std::vector<int>{0});
  }
  SUBCASE("all-zero indicators mark nothing") {
    CHECK(mark_elements({0.0, 0.0, 0.0}, 0.5).empty());
  }
  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(mark_elements({1.0}, 0.0), ConfigError);
    CHECK_THROWS_AS(mark_elements({1.0}, 1.5), ConfigError);
    CHECK_THROWS_AS(mark_elements({-1.0}, 0.5), ValidationError);
  }
}

TEST_CASE("adaptive loop") {
  const UpwindScheme scheme = UpwindScheme::by_name("exponential");

  SUBCASE("infinite tolerance stops after a single cycle") {
    const Problem prob = make_problem("p1_poisson");
    const GoalFunctional goal = make_goal("mean_value");
    AdaptiveOptions opts;
    opts.goal_tolerance = std::numeric_limits<double>::infinity();
    opts.max_cycles = 5;
    const AdaptiveResult result =
        run_adaptive_loop(prob, goal, friedrichs_keller(4), DualKind::voronoi, scheme, opts);
    CHECK(result.cycles.size() == 1);
    CHECK(result.tolerance_reached);
  }
  SUBCASE("tolerance above the first estimate stops immediately") {
    const Problem prob = make_problem("p1_poisson");
    const GoalFunctional goal = make_goal("mean_value");
    AdaptiveOptions opts;
    opts.goal_tolerance = 1.0;  // far above the first-cycle estimate
    opts.max_cycles = 5;
    const AdaptiveResult result =
        run_adaptive_loop(prob, goal, friedrichs_keller(8), DualKind::voronoi, scheme, opts);
    CHECK(result.cycles.size() == 1);
    CHECK(result.tolerance_reached);
  }
  SUBCASE("estimate trend on the convection-dominated problem") {
    const Problem prob = make_problem("p2_convdiff", {{"eps", 0.01}});
    const GoalFunctional goal = make_goal("mean_value");
    AdaptiveOptions opts;
    opts.max_cycles = 5;
    const AdaptiveResult result =
        run_adaptive_loop(prob, goal, friedrichs_keller(8), DualKind::voronoi, scheme, opts);
    REQUIRE(result.cycles.size() == 5);
    int violations = 0;
    for (std::size_t k = 0; k + 1 < result.cycles.size(); ++k) {
      if (std::abs(result.cycles[k + 1].total_estimate) >
          std::abs(result.cycles[k].total_estimate))
        ++violations;
    }
    CHECK(violations <= 1);
    // The mesh grows where it should.
    CHECK(result.final_mesh.num_elements() > 128);
  }
}

TEST_CASE("Voronoi invalidation under refinement") {
  // Equilateral star: bisection eventually produces 30-30-120 grandchildren,
  // which are not self-centered.
  std::vector<Vec2> verts{{0, 0}};
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    verts.push_back({std::cos(a), std::sin(a)});
  }
  std::vector<std::array<int, 3>> elems;
  for (int k = 0; k < 6; ++k) elems.push_back({0, 1 + k, 1 + (k + 1) % 6});
  const Mesh hexagon(verts, elems);
  REQUIRE(validate_primary_mesh(hexagon, DualKind::voronoi).admissible_for(DualKind::voronoi));

  Problem prob;
  prob.name = "custom";
  prob.split.reduced.c = [](Vec2, double) { return 1.0; };
  prob.split.reduced.f = [](Vec2) { return 1.0; };
  prob.split.reduced.normalize();
  const GoalFunctional goal = make_goal("mean_value");
  const UpwindScheme scheme = UpwindScheme::by_name("exponential");

  AdaptiveOptions opts;
  opts.max_cycles = 6;
  opts.theta = 1.0;  // refine everything every cycle

  SUBCASE("falls back to Donald diagrams when allowed") {
    opts.voronoi_fallback_to_donald = true;
    const AdaptiveResult result =
        run_adaptive_loop(prob, goal, hexagon, DualKind::voronoi, scheme, opts);
    CHECK(result.cycles.size() == 6);
    CHECK_FALSE(result.voronoi_invalidated);
    CHECK(result.cycles.front().dual_kind == DualKind::voronoi);
    CHECK(result.cycles.back().dual_kind == DualKind::donald);
  }
  SUBCASE("stops with a status when the fallback is disabled") {
    opts.voronoi_fallback_to_donald = false;
    const AdaptiveResult result =
        run_adaptive_loop(prob, goal, hexagon, DualKind::voronoi, scheme, opts);
    CHECK(result.voronoi_invalidated);
    CHECK(result.cycles.size() < 6);
    for (const auto& c : result.cycles) CHECK(c.dual_kind == DualKind::voronoi);
  }
}
