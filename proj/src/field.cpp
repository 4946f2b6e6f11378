#include "fvdwr/field.hpp"

#include <cmath>

#include "fvdwr/quadrature.hpp"

namespace fvdwr {

double P1Field::eval(int element, const Vec2& p) const {
  const auto& t = mesh_->element(element);
  const BarycentricMap bm(mesh_->vertex(t[0]), mesh_->vertex(t[1]), mesh_->vertex(t[2]));
  const auto l = bm(p);
  return l[0] * values_[t[0]] + l[1] * values_[t[1]] + l[2] * values_[t[2]];
}

Vec2 P1Field::gradient(int element) const {
  const auto& t = mesh_->element(element);
  const Vec2& a = mesh_->vertex(t[0]);
  const Vec2& b = mesh_->vertex(t[1]);
  const Vec2& c = mesh_->vertex(t[2]);
  const double inv2A = 1.0 / (2.0 * signed_area(a, b, c));
  // grad = sum_k v_k * grad(lambda_k); grad(lambda_k) = perp(opposite edge) / (2A)
  const Vec2 g0 = perp(c - b) * inv2A;
  const Vec2 g1 = perp(a - c) * inv2A;
  const Vec2 g2 = perp(b - a) * inv2A;
  return g0 * values_[t[0]] + g1 * values_[t[1]] + g2 * values_[t[2]];
}

void P1Field::zero_boundary() {
  for (int i = 0; i < size(); ++i)
    if (mesh_->is_boundary_vertex(i)) values_[i] = 0.0;
}

P1Field interpolate(const Mesh& mesh, const std::function<double(Vec2)>& f) {
  P1Field v(mesh);
  for (int i = 0; i < mesh.num_vertices(); ++i) v[i] = f(mesh.vertex(i));
  return v;
}

double l2_norm(const P1Field& v, int quad_degree) {
  const Mesh& mesh = v.mesh();
  const TriangleRule& rule = triangle_rule(quad_degree);
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double val = v.eval(e, q.x);
      s += q.w * val * val;
    }
  }
  return std::sqrt(s);
}

double h1_seminorm(const P1Field& v) {
  const Mesh& mesh = v.mesh();
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Vec2 g = v.gradient(e);
    s += mesh.element_area(e) * dot(g, g);
  }
  return std::sqrt(s);
}

double lumped_norm(const P1Field& v, const DualDiagram& diagram) {
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += v[i] * v[i] * diagram.m_i(i);
  return std::sqrt(s);
}

double discrete_v_seminorm(const P1Field& v, const DualDiagram& diagram) {
  double s = 0.0;
  for (const auto& e : diagram.edges()) {
    const double diff = v[e.a] - v[e.b];
    s += diff * diff * e.m / e.d;
  }
  return std::sqrt(s);
}

double xi_norm(const P1Field& v, const DualDiagram& diagram) {
  const double semi = diagram.kind() == DualKind::voronoi ? discrete_v_seminorm(v, diagram)
                                                          : h1_seminorm(v);
  const double lumped = lumped_norm(v, diagram);
  return std::sqrt(semi * semi + lumped * lumped);
}

}  // namespace fvdwr
