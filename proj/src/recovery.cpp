#include "fvdwr/recovery.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "fvdwr/newton.hpp"
#include "fvdwr/quadrature.hpp"

namespace fvdwr {

namespace {

// Star of a vertex: mesh neighbours, extended by the second ring while fewer
// than six points (center included) are available.
std::vector<int> patch_points(const Mesh& mesh, int center) {
  std::set<int> pts(mesh.vertex_neighbors(center).begin(), mesh.vertex_neighbors(center).end());
  if (static_cast<int>(pts.size()) + 1 < 6) {
    const std::vector<int> first(pts.begin(), pts.end());
    for (int n : first)
      for (int nn : mesh.vertex_neighbors(n))
        if (nn != center) pts.insert(nn);
  }
  return {pts.begin(), pts.end()};
}

}  // namespace

RecoveredField::RecoveredField(const P1Field& base, PatchEvaluation evaluation)
    : base_(base), evaluation_(evaluation) {
  const Mesh& mesh = base_.mesh();
  const int nv = mesh.num_vertices();
  coeffs_.assign(nv, {});
  scales_.assign(nv, 1.0);
  rank_deficient_.assign(nv, 0);

  for (int i = 0; i < nv; ++i) {
    const Vec2 center = mesh.vertex(i);
    const std::vector<int> pts = patch_points(mesh, i);

    double scale = 0.0;
    for (int p : pts) scale = std::max(scale, dist(center, mesh.vertex(p)));
    if (scale == 0.0) scale = 1.0;
    scales_[i] = scale;

    // Quadratic with the constant pinned to the nodal value; five free
    // coefficients fitted over the star in scaled local coordinates.
    const int npts = static_cast<int>(pts.size());
    Eigen::MatrixXd M(npts, 5);
    Eigen::VectorXd rhs(npts);
    for (int row = 0; row < npts; ++row) {
      const Vec2 q = (mesh.vertex(pts[row]) - center) / scale;
      M(row, 0) = q.x;
      M(row, 1) = q.y;
      M(row, 2) = q.x * q.x;
      M(row, 3) = q.x * q.y;
      M(row, 4) = q.y * q.y;
      rhs(row) = base_[pts[row]] - base_[i];
    }
    Eigen::MatrixXd N = M.transpose() * M;
    Eigen::VectorXd g = M.transpose() * rhs;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
    lu.setThreshold(1e-10);
    std::array<double, 6> c{};
    c[0] = base_[i];
    if (lu.rank() == 5) {
      const Eigen::VectorXd sol = lu.solve(g);
      for (int k = 0; k < 5; ++k) c[k + 1] = sol[k];
    } else {
      // Collinear or tiny star: linear fallback.
      rank_deficient_[i] = 1;
      Eigen::MatrixXd Ml = M.leftCols(2);
      Eigen::MatrixXd Nl = Ml.transpose() * Ml;
      Eigen::VectorXd gl = Ml.transpose() * rhs;
      Eigen::FullPivLU<Eigen::MatrixXd> lul(Nl);
      lul.setThreshold(1e-10);
      if (lul.rank() == 2) {
        const Eigen::VectorXd sol = lul.solve(gl);
        c[1] = sol[0];
        c[2] = sol[1];
      }
    }
    coeffs_[i] = c;
  }
}

int RecoveredField::nearest_vertex(int element, const Vec2& p) const {
  const auto& t = mesh().element(element);
  int best = t[0];
  double best_d = dist(p, mesh().vertex(t[0]));
  for (int k = 1; k < 3; ++k) {
    const double d = dist(p, mesh().vertex(t[k]));
    if (d < best_d - 1e-14 * (1.0 + best_d) ||
        (std::abs(d - best_d) <= 1e-14 * (1.0 + best_d) && t[k] < best)) {
      best = t[k];
      best_d = d;
    }
  }
  return best;
}

double RecoveredField::eval_patch(int vertex, const Vec2& p) const {
  const Vec2 q = (p - mesh().vertex(vertex)) / scales_[vertex];
  const auto& c = coeffs_[vertex];
  return c[0] + c[1] * q.x + c[2] * q.y + c[3] * q.x * q.x + c[4] * q.x * q.y + c[5] * q.y * q.y;
}

Vec2 RecoveredField::grad_patch(int vertex, const Vec2& p) const {
  const Vec2 q = (p - mesh().vertex(vertex)) / scales_[vertex];
  const auto& c = coeffs_[vertex];
  const double inv = 1.0 / scales_[vertex];
  return {(c[1] + 2.0 * c[3] * q.x + c[4] * q.y) * inv, (c[2] + c[4] * q.x + 2.0 * c[5] * q.y) * inv};
}

double RecoveredField::evaluate(int element, const Vec2& p) const {
  if (evaluation_ == PatchEvaluation::nearest_vertex)
    return eval_patch(nearest_vertex(element, p), p);
  const auto& t = mesh().element(element);
  const BarycentricMap bm(mesh().vertex(t[0]), mesh().vertex(t[1]), mesh().vertex(t[2]));
  const auto lambda = bm(p);
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += lambda[k] * eval_patch(t[k], p);
  return s;
}

Vec2 RecoveredField::gradient(int element, const Vec2& p) const {
  if (evaluation_ == PatchEvaluation::nearest_vertex)
    return grad_patch(nearest_vertex(element, p), p);
  const auto& t = mesh().element(element);
  const Vec2& a = mesh().vertex(t[0]);
  const Vec2& b = mesh().vertex(t[1]);
  const Vec2& c = mesh().vertex(t[2]);
  const BarycentricMap bm(a, b, c);
  const auto lambda = bm(p);
  const double inv2A = 1.0 / (2.0 * signed_area(a, b, c));
  const std::array<Vec2, 3> gl = {perp(c - b) * inv2A, perp(a - c) * inv2A, perp(b - a) * inv2A};
  Vec2 g{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    g += lambda[k] * grad_patch(t[k], p);
    g += eval_patch(t[k], p) * gl[k];
  }
  return g;
}

double RecoveredField::diff_value(int element, const Vec2& p) const {
  return evaluate(element, p) - base_.eval(element, p);
}

Vec2 RecoveredField::diff_grad(int element, const Vec2& p) const {
  return gradient(element, p) - base_.gradient(element);
}

PointField RecoveredField::weight() const {
  PointField pf;
  pf.value = [this](int e, const Vec2& x) { return diff_value(e, x); };
  pf.grad = [this](int e, const Vec2& x) { return diff_grad(e, x); };
  return pf;
}

bool RecoveredField::any_rank_deficient() const {
  return std::any_of(rank_deficient_.begin(), rank_deficient_.end(),
                     [](std::uint8_t f) { return f != 0; });
}

RecoveredField recover_higher_order(const P1Field& field, PatchEvaluation evaluation) {
  return RecoveredField(field, evaluation);
}

P1Field solve_dual(const DiscreteSystem& system, const P1Field& u, const GoalFunctional& goal,
                   DualMethod method) {
  const SpMat G = method == DualMethod::galerkin
                      ? galerkin_linearization(system.coeffs(), system, u)
                      : system.jacobian(u);
  const Mesh& mesh = system.mesh();
  const TriangleRule& rule = triangle_rule(system.quad_degree());

  // Right-hand side j'(u; psi_i) by element quadrature.
  std::vector<double> rhs_full(mesh.num_vertices(), 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double dj = goal.d_integrand(q.x, u.eval(e, q.x));
      const auto lambda = bm(q.x);
      for (int k = 0; k < 3; ++k) rhs_full[t[k]] += q.w * dj * lambda[k];
    }
  }
  Eigen::VectorXd rhs(system.num_unknowns());
  for (int k = 0; k < system.num_unknowns(); ++k) rhs[k] = rhs_full[system.unknown_vertices()[k]];

  const Eigen::VectorXd z = sparse_solve(SpMat(G.transpose()), rhs);
  return system.from_unknowns(z);
}

}  // namespace fvdwr
