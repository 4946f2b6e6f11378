#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fvdwr/errors.hpp"
#include "fvdwr/mesh.hpp"

using namespace fvdwr;

namespace {

Mesh unit_right_triangle() {
  return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
}

// FEM admissibility: every edge on at most two elements and no vertex in the
// interior of another element's edge.
void check_conforming(const Mesh& mesh) {
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = mesh.vertex(t[k]);
      const Vec2& b = mesh.vertex(t[(k + 1) % 3]);
      for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (v == t[k] || v == t[(k + 1) % 3]) continue;
        const Vec2& p = mesh.vertex(v);
        const double along = dot(p - a, b - a) / dot(b - a, b - a);
        if (along <= 1e-9 || along >= 1.0 - 1e-9) continue;
        const double off = std::abs(cross(b - a, p - a)) / norm(b - a);
        CAPTURE(e);
        CAPTURE(v);
        REQUIRE(off > 1e-12);  // hanging node otherwise
      }
    }
  }
}

}  // namespace

TEST_CASE("two-triangle unit square has only boundary vertices") {
  Mesh mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}}, {{0, 2, 3}}});
  CHECK(mesh.num_boundary_vertices() == 4);
  CHECK(mesh.num_interior_vertices() == 0);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("single triangle boundary detection") {
  Mesh mesh = unit_right_triangle();
  CHECK(mesh.num_boundary_vertices() == 3);
}

TEST_CASE("Friedrichs-Keller n=4 counts") {
  Mesh mesh = friedrichs_keller(4);
  CHECK(mesh.num_vertices() == 25);
  CHECK(mesh.num_elements() == 32);
  CHECK(mesh.num_boundary_vertices() == 16);
  CHECK(mesh.num_interior_vertices() == 9);
  CHECK(mesh.total_area() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mesh loader round trip and errors") {
  SUBCASE("round trip") {
    std::stringstream s;
    save_mesh(friedrichs_keller(3), s);
    Mesh mesh = load_mesh(s);
    CHECK(mesh.num_vertices() == 16);
    CHECK(mesh.num_elements() == 18);
    CHECK(mesh.num_boundary_vertices() == 12);
  }
  SUBCASE("malformed header") {
    std::stringstream s("3\n");
    CHECK_THROWS_AS(load_mesh(s), ParseError);
  }
  SUBCASE("vertex index out of range") {
    std::stringstream s("3 1\n0 0\n1 0\n0 1\n0 1 5\n");
    CHECK_THROWS_AS(load_mesh(s), ParseError);
  }
  SUBCASE("3d coordinates rejected") {
    std::stringstream s("3 1\n0 0 0 1\n1 0 0 1\n0 1 0 1\n0 1 2\n");
    CHECK_THROWS_AS(load_mesh(s), ParseError);
  }
  SUBCASE("zero-area element") {
    std::stringstream s("3 1\n0 0\n1 0\n2 0\n0 1 2\n");
    CHECK_THROWS_AS(load_mesh(s), TopologyError);
  }
  SUBCASE("non-manifold edge") {
    std::stringstream s("5 3\n0 0\n1 0\n0 1\n1 1\n-1 -1\n0 1 2\n0 1 3\n0 1 4\n");
    CHECK_THROWS_AS(load_mesh(s), TopologyError);
  }
  SUBCASE("contradictory boundary flags") {
    std::stringstream s("3 1\n0 0 1\n1 0 1\n0 1 0\n0 1 2\n");
    CHECK_THROWS_AS(load_mesh(s), ValidationError);
  }
}

TEST_CASE("validation: self-centered and Delaunay flags") {
  SUBCASE("right triangle is self-centered (circumcenter on the boundary)") {
    const auto report = validate_primary_mesh(unit_right_triangle(), DualKind::voronoi);
    CHECK(report.all_self_centered);
    CHECK(report.delaunay);
    const Vec2 cc = unit_right_triangle().element_circumcenter(0);
    CHECK(cc.x == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cc.y == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("obtuse triangle is not self-centered") {
    Mesh mesh({{0, 0}, {1, 0}, {0.5, 0.1}}, {{{0, 1, 2}}});
    const auto report = validate_primary_mesh(mesh, DualKind::voronoi);
    CHECK_FALSE(report.all_self_centered);
    REQUIRE(report.not_self_centered.size() == 1);
    CHECK(report.not_self_centered[0] == 0);
    // Circumcenter lies below the triangle.
    CHECK(mesh.element_circumcenter(0).y < 0.0);
  }
  SUBCASE("equilateral triangle: circumcenter equals barycenter") {
    Mesh mesh({{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}}, {{{0, 1, 2}}});
    const auto report = validate_primary_mesh(mesh, DualKind::voronoi);
    CHECK(report.all_self_centered);
    const Vec2 cc = mesh.element_circumcenter(0);
    const Vec2 bc = mesh.element_barycenter(0);
    CHECK(dist(cc, bc) < 1e-14);
  }
  SUBCASE("non-Delaunay pair is flagged") {
    // Flat convex quad triangulated the wrong way: each apex lies inside the
    // other triangle's circumcircle.
    Mesh mesh({{0, 0}, {1, 0}, {0.5, 0.4}, {0.5, -0.4}}, {{{0, 1, 2}}, {{1, 0, 3}}});
    const auto report = validate_primary_mesh(mesh, DualKind::voronoi);
    CHECK_FALSE(report.delaunay);
    CHECK(report.admissible_for(DualKind::donald));
    CHECK_FALSE(report.admissible_for(DualKind::voronoi));
  }
  SUBCASE("validation is pure") {
    Mesh mesh = friedrichs_keller(3);
    const auto r1 = validate_primary_mesh(mesh, DualKind::voronoi);
    const auto r2 = validate_primary_mesh(mesh, DualKind::voronoi);
    CHECK(r1.all_self_centered == r2.all_self_centered);
    CHECK(r1.delaunay == r2.delaunay);
    CHECK(r1.min_inradius_ratio == r2.min_inradius_ratio);
  }
}

TEST_CASE("barycentric map identity pattern") {
  Mesh mesh = unit_right_triangle();
  const ElementGeometry geo = element_geometry(mesh, 0);
  for (int k = 0; k < 3; ++k) {
    const auto l = geo.barycentric_map(mesh.vertex(mesh.element(0)[k]));
    for (int j = 0; j < 3; ++j) CHECK(l[j] == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-14));
  }
  const auto l = geo.barycentric_map({0.3, 0.3});
  CHECK(l[0] + l[1] + l[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(geo.diameter == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("refinement: empty marking returns the mesh unchanged") {
  Mesh mesh = friedrichs_keller(2);
  Mesh out = refine_mesh(mesh, {});
  CHECK(out.num_vertices() == mesh.num_vertices());
  CHECK(out.num_elements() == mesh.num_elements());
  CHECK(out.generation() == mesh.generation());
}

TEST_CASE("refinement: single triangle single bisection") {
  Mesh mesh = unit_right_triangle();
  Mesh out = refine_mesh(mesh, {0});
  CHECK(out.num_elements() == 2);
  CHECK(out.num_vertices() == 4);
  CHECK(out.generation() == 1);
  // New vertex is the midpoint of the refinement edge (the hypotenuse).
  CHECK(dist(out.vertex(3), {0.5, 0.5}) < 1e-15);
  CHECK(out.total_area() == doctest::Approx(0.5).epsilon(1e-14));
  check_conforming(out);
}

TEST_CASE("refinement: two uniform passes quadruple the element count") {
  Mesh mesh = friedrichs_keller(4);
  Mesh once = refine_uniform(mesh);
  Mesh twice = refine_uniform(once);
  CHECK(once.num_elements() == 2 * mesh.num_elements());
  CHECK(twice.num_elements() == 4 * mesh.num_elements());
  CHECK(once.total_area() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(twice.total_area() == doctest::Approx(1.0).epsilon(1e-13));
  check_conforming(once);
  check_conforming(twice);
  // Width halves after the double pass.
  CHECK(twice.max_diameter() == doctest::Approx(mesh.max_diameter() / 2.0).epsilon(1e-13));
  // Refined meshes of a Friedrichs-Keller grid stay Voronoi-admissible.
  CHECK(validate_primary_mesh(twice, DualKind::voronoi).admissible_for(DualKind::voronoi));
}

TEST_CASE("refinement: prefix property and boundary preservation") {
  Mesh mesh = friedrichs_keller(3);
  std::vector<std::array<int, 2>> parents;
  Mesh out = refine_mesh(mesh, {0, 5, 7}, &parents);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    CHECK(dist(out.vertex(i), mesh.vertex(i)) == 0.0);
    CHECK(parents[i][0] == i);
    CHECK(parents[i][1] == i);
  }
  check_conforming(out);
  CHECK(out.total_area() == doctest::Approx(1.0).epsilon(1e-13));
  for (int i = mesh.num_vertices(); i < out.num_vertices(); ++i) {
    const auto [a, b] = std::pair(parents[i][0], parents[i][1]);
    CHECK(dist(out.vertex(i), midpoint(out.vertex(a), out.vertex(b))) < 1e-15);
    // New boundary vertices lie on parent boundary edges.
    if (out.is_boundary_vertex(i)) {
      const bool on_unit_square_boundary =
          out.vertex(i).x < 1e-14 || out.vertex(i).x > 1 - 1e-14 || out.vertex(i).y < 1e-14 ||
          out.vertex(i).y > 1 - 1e-14;
      CHECK(on_unit_square_boundary);
    }
  }
}

TEST_CASE("refinement: marked subset is bisected") {
  Mesh mesh = friedrichs_keller(4);
  const double area0 = mesh.element_area(10);
  Mesh out = refine_mesh(mesh, {10});
  CHECK(out.num_elements() > mesh.num_elements());
  check_conforming(out);
  // The marked element is gone; the piece covering its barycenter is at most
  // half its size.
  double covered = 0.0;
  const Vec2 c = mesh.element_barycenter(10);
  for (int e = 0; e < out.num_elements(); ++e) {
    const auto& t = out.element(e);
    const BarycentricMap bm(out.vertex(t[0]), out.vertex(t[1]), out.vertex(t[2]));
    const auto l = bm(c);
    if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12) covered = out.element_area(e);
  }
  CHECK(covered <= area0 / 2.0 + 1e-15);
}
