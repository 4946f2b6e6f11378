#include "fvdwr/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "fvdwr/errors.hpp"
#include "fvdwr/quadrature.hpp"

namespace fvdwr {

namespace {

std::array<Vec2, 3> basis_gradients(const Mesh& mesh, int e) {
  const auto& t = mesh.element(e);
  const Vec2& a = mesh.vertex(t[0]);
  const Vec2& b = mesh.vertex(t[1]);
  const Vec2& c = mesh.vertex(t[2]);
  const double inv2A = 1.0 / (2.0 * signed_area(a, b, c));
  return {perp(c - b) * inv2A, perp(a - c) * inv2A, perp(b - a) * inv2A};
}

struct EdgeCoeffData {
  double mu = 0.0;
  double gamma = 0.0;  // orientation a -> b
  struct Deriv {
    int vertex;
    double dmu;
    double dgamma;
  };
  std::vector<Deriv> derivs;
};

void add_deriv(EdgeCoeffData& data, int vertex, double dmu, double dgamma) {
  for (auto& d : data.derivs) {
    if (d.vertex == vertex) {
      d.dmu += dmu;
      d.dgamma += dgamma;
      return;
    }
  }
  data.derivs.push_back({vertex, dmu, dgamma});
}

// Transmissibility and convective face mean of one dual edge at state w.
//
// Scalar diffusion uses the edge-midpoint / state-average value. Tensor
// diffusion uses the flux of the nodal basis through the control-volume
// boundary, symmetrized over the two orientations. The convective mean is the
// midpoint value for Voronoi diagrams and the interface average of nu.b for
// Donald diagrams.
EdgeCoeffData edge_coefficient(const Coefficients& coeffs, const DualDiagram& diagram,
                               int edge_idx, const P1Field& w, bool with_derivs,
                               int quad_degree) {
  const Mesh& mesh = diagram.mesh();
  const DualDiagram::Edge& edge = diagram.edge(edge_idx);
  const SegmentRule& seg_rule = segment_rule(quad_degree);
  EdgeCoeffData data;

  const Vec2 mid = midpoint(mesh.vertex(edge.a), mesh.vertex(edge.b));
  const double sbar = 0.5 * (w[edge.a] + w[edge.b]);

  if (!coeffs.matrix_valued) {
    data.mu = coeffs.A(mid, sbar);
    if (with_derivs) {
      const double dmu = 0.5 * coeffs.dA(mid, sbar);
      add_deriv(data, edge.a, dmu, 0.0);
      add_deriv(data, edge.b, dmu, 0.0);
    }
  } else if (edge.m > 0.0) {
    // mu = d/m * flux of the basis of one endpoint through the boundary of
    // the other endpoint's box, averaged over both orientations.
    double flux_ab = 0.0;  // integral over boundary of box a of (A grad psi_b) . nu
    double flux_ba = 0.0;
    for (int elem : edge.elements) {
      if (elem < 0) continue;
      const auto& t = mesh.element(elem);
      const auto grads = basis_gradients(mesh, elem);
      int la = -1, lb = -1;
      for (int k = 0; k < 3; ++k) {
        if (t[k] == edge.a) la = k;
        if (t[k] == edge.b) lb = k;
      }
      for (int s : diagram.element_segments(elem)) {
        const DualDiagram::Segment& seg = diagram.segment(s);
        if (seg.length == 0.0) continue;
        const DualDiagram::Edge& seg_edge = diagram.edge(seg.edge);
        // Outward normals of the two boxes this segment separates.
        const bool a_owns = seg_edge.a == edge.a || seg_edge.b == edge.a;
        const bool b_owns = seg_edge.a == edge.b || seg_edge.b == edge.b;
        const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
        for (const auto& q : map_to_segment(seg_rule, seg.p0, seg.p1)) {
          const double sq = w.eval(elem, q.x);
          const Mat2 Aq = coeffs.A_mat(q.x, sq);
          if (a_owns) {
            const Vec2 n = seg_edge.a == edge.a ? seg.normal : seg.normal * -1.0;
            flux_ab += q.w * dot(Aq * grads[lb], n);
          }
          if (b_owns) {
            const Vec2 n = seg_edge.a == edge.b ? seg.normal : seg.normal * -1.0;
            flux_ba += q.w * dot(Aq * grads[la], n);
          }
          if (with_derivs && (a_owns || b_owns)) {
            const Mat2 dAq = coeffs.dA_mat(q.x, sq);
            const auto lambda = bm(q.x);
            for (int k = 0; k < 3; ++k) {
              double dmu_k = 0.0;
              if (a_owns) {
                const Vec2 n = seg_edge.a == edge.a ? seg.normal : seg.normal * -1.0;
                dmu_k += q.w * lambda[k] * dot(dAq * grads[lb], n);
              }
              if (b_owns) {
                const Vec2 n = seg_edge.a == edge.b ? seg.normal : seg.normal * -1.0;
                dmu_k += q.w * lambda[k] * dot(dAq * grads[la], n);
              }
              add_deriv(data, t[k], dmu_k, 0.0);  // scaled below
            }
          }
        }
      }
    }
    const double scale = 0.5 * edge.d / edge.m;
    data.mu = scale * (flux_ab + flux_ba);
    for (auto& d : data.derivs) d.dmu *= scale;
  }

  if (diagram.kind() == DualKind::voronoi) {
    data.gamma = dot(edge.nu, coeffs.b(mid, sbar));
    if (with_derivs) {
      const double dg = 0.5 * dot(edge.nu, coeffs.db(mid, sbar));
      add_deriv(data, edge.a, 0.0, dg);
      add_deriv(data, edge.b, 0.0, dg);
    }
  } else if (edge.m > 0.0) {
    // Donald interfaces are not perpendicular to the vertex connection, so
    // the convective mean uses the true interface normal (oriented a -> b).
    double acc = 0.0;
    for (int s : diagram.edge_segments(edge_idx)) {
      const DualDiagram::Segment& seg = diagram.segment(s);
      if (seg.length == 0.0) continue;
      const int elem = seg.element;
      const auto& t = mesh.element(elem);
      const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
      for (const auto& q : map_to_segment(seg_rule, seg.p0, seg.p1)) {
        const double sq = w.eval(elem, q.x);
        acc += q.w * dot(seg.normal, coeffs.b(q.x, sq));
        if (with_derivs) {
          const double db = dot(seg.normal, coeffs.db(q.x, sq));
          const auto lambda = bm(q.x);
          for (int k = 0; k < 3; ++k) add_deriv(data, t[k], 0.0, q.w * lambda[k] * db / edge.m);
        }
      }
    }
    data.gamma = acc / edge.m;
  }
  return data;
}

void upwind_weights(const UpwindScheme& scheme, double gamma, double d, double mu, double& r_ab,
                    double& r_ba) {
  if (mu > 0.0) {
    const double z = gamma * d / mu;
    r_ab = scheme.r(z);
    r_ba = scheme.r(-z);
  } else if (gamma > 0.0) {
    r_ab = scheme.r_limit(+1);
    r_ba = scheme.r_limit(-1);
  } else if (gamma < 0.0) {
    r_ab = scheme.r_limit(-1);
    r_ba = scheme.r_limit(+1);
  } else {
    r_ab = r_ba = 0.5;
  }
}

}  // namespace

EdgeCoefficients compute_edge_coefficients(const Coefficients& coeffs, const DualDiagram& diagram,
                                           const UpwindScheme& scheme, const P1Field& w,
                                           int quad_degree) {
  EdgeCoefficients out;
  const int n = diagram.num_edges();
  out.mu.resize(n);
  out.gamma_ab.resize(n);
  out.r_ab.resize(n);
  out.r_ba.resize(n);
  for (int idx = 0; idx < n; ++idx) {
    const auto data = edge_coefficient(coeffs, diagram, idx, w, false, quad_degree);
    out.mu[idx] = data.mu;
    out.gamma_ab[idx] = data.gamma;
    upwind_weights(scheme, data.gamma, diagram.edge(idx).d, data.mu, out.r_ab[idx],
                   out.r_ba[idx]);
  }
  return out;
}

DiscreteSystem::DiscreteSystem(const DualDiagram& diagram, const UpwindScheme& scheme,
                               const Coefficients& coeffs, SystemOptions options)
    : diagram_(&diagram), scheme_(scheme), coeffs_(coeffs), options_(options) {
  const Mesh& m = diagram.mesh();
  equation_of_.assign(m.num_vertices(), -1);
  for (int i = 0; i < m.num_vertices(); ++i) {
    if (!m.is_boundary_vertex(i)) {
      equation_of_[i] = static_cast<int>(unknowns_.size());
      unknowns_.push_back(i);
    }
  }
  divfree_active_ = options_.divfree == DivfreeVariant::on ||
                    (options_.divfree == DivfreeVariant::automatic &&
                     coeffs_.div_b_declared_zero);
}

P1Field DiscreteSystem::from_unknowns(const Eigen::VectorXd& x) const {
  P1Field w(mesh());
  for (int k = 0; k < num_unknowns(); ++k) w[unknowns_[k]] = x[k];
  return w;
}

Eigen::VectorXd DiscreteSystem::to_unknowns(const P1Field& w) const {
  Eigen::VectorXd x(num_unknowns());
  for (int k = 0; k < num_unknowns(); ++k) x[k] = w[unknowns_[k]];
  return x;
}

std::vector<double> DiscreteSystem::action_rows(const P1Field& w) const {
  const Mesh& mesh = diagram_->mesh();
  std::vector<double> rows(mesh.num_vertices(), 0.0);

  if (options_.mode == DiscretizationMode::conforming) {
    const TriangleRule& rule = triangle_rule(options_.quad_degree);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.element(e);
      const auto grads = basis_gradients(mesh, e);
      const Vec2 gw = w.gradient(e);
      const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
      for (const auto& q :
           map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
        const double wq = w.eval(e, q.x);
        const Vec2 Agw = coeffs_.diffusion(q.x, wq) * gw;
        const double conv = dot(coeffs_.b(q.x, wq), gw);
        const double react = coeffs_.c(q.x, wq) * wq;
        const auto lambda = bm(q.x);
        for (int k = 0; k < 3; ++k)
          rows[t[k]] += q.w * (dot(Agw, grads[k]) + (conv + react) * lambda[k]);
      }
    }
  } else {
    // Edge terms of the box scheme.
    for (int idx = 0; idx < diagram_->num_edges(); ++idx) {
      const DualDiagram::Edge& edge = diagram_->edge(idx);
      const auto data = edge_coefficient(coeffs_, *diagram_, idx, w, false, options_.quad_degree);
      double r_ab, r_ba;
      upwind_weights(scheme_, data.gamma, edge.d, data.mu, r_ab, r_ba);
      const double wa = w[edge.a], wb = w[edge.b];
      if (diagram_->kind() == DualKind::voronoi) {
        const double t_diff = data.mu * (wa - wb) * edge.m / edge.d;
        rows[edge.a] += t_diff;
        rows[edge.b] -= t_diff;
      }
      if (divfree_active_) {
        rows[edge.a] += ((1.0 - r_ab) * wb + r_ab * wa) * data.gamma * edge.m;
        rows[edge.b] -= ((1.0 - r_ba) * wa + r_ba * wb) * data.gamma * edge.m;
      } else {
        rows[edge.a] -= (1.0 - r_ab) * data.gamma * (wa - wb) * edge.m;
        rows[edge.b] += (1.0 - r_ba) * data.gamma * (wb - wa) * edge.m;
      }
    }
    // Exact piecewise-linear diffusion for Donald diagrams.
    if (diagram_->kind() == DualKind::donald) {
      const TriangleRule& rule = triangle_rule(options_.quad_degree);
      for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const auto grads = basis_gradients(mesh, e);
        const Vec2 gw = w.gradient(e);
        for (const auto& q :
             map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
          const Vec2 Agw = coeffs_.diffusion(q.x, w.eval(e, q.x)) * gw;
          for (int k = 0; k < 3; ++k) rows[t[k]] += q.w * dot(Agw, grads[k]);
        }
      }
    }
    // Lumped reaction.
    for (int i = 0; i < mesh.num_vertices(); ++i)
      rows[i] += coeffs_.c(mesh.vertex(i), w[i]) * w[i] * diagram_->m_i(i);
  }

  for (int i = 0; i < mesh.num_vertices(); ++i)
    if (mesh.is_boundary_vertex(i)) rows[i] = 0.0;
  return rows;
}

Eigen::VectorXd DiscreteSystem::lumped_rhs() const {
  const Mesh& mesh = diagram_->mesh();
  Eigen::VectorXd rhs(num_unknowns());
  if (options_.mode == DiscretizationMode::conforming) {
    std::vector<double> load(mesh.num_vertices(), 0.0);
    const TriangleRule& rule = triangle_rule(options_.quad_degree);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.element(e);
      const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
      for (const auto& q :
           map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
        const double fq = coeffs_.f(q.x);
        const auto lambda = bm(q.x);
        for (int k = 0; k < 3; ++k) load[t[k]] += q.w * fq * lambda[k];
      }
    }
    for (int k = 0; k < num_unknowns(); ++k) rhs[k] = load[unknowns_[k]];
  } else {
    for (int k = 0; k < num_unknowns(); ++k) {
      const int i = unknowns_[k];
      rhs[k] = coeffs_.f(mesh.vertex(i)) * diagram_->m_i(i);
    }
  }
  return rhs;
}

Eigen::VectorXd DiscreteSystem::residual(const P1Field& w) const {
  const auto rows = action_rows(w);
  const Eigen::VectorXd rhs = lumped_rhs();
  Eigen::VectorXd F(num_unknowns());
  for (int k = 0; k < num_unknowns(); ++k) F[k] = rows[unknowns_[k]] - rhs[k];
  return F;
}

double DiscreteSystem::apply_form(const P1Field& w, const P1Field& v) const {
  const auto rows = action_rows(w);
  double s = 0.0;
  for (int i : unknowns_) s += v[i] * rows[i];
  return s;
}

SpMat DiscreteSystem::jacobian(const P1Field& w) const {
  if (options_.mode == DiscretizationMode::conforming)
    return galerkin_linearization(coeffs_, *this, w);

  const Mesh& mesh = diagram_->mesh();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(16 * num_unknowns());
  auto push = [&](int vi, int vk, double val) {
    const int i = equation_of_[vi];
    const int k = equation_of_[vk];
    if (i >= 0 && k >= 0 && val != 0.0) trip.emplace_back(i, k, val);
  };

  for (int idx = 0; idx < diagram_->num_edges(); ++idx) {
    const DualDiagram::Edge& edge = diagram_->edge(idx);
    const auto data = edge_coefficient(coeffs_, *diagram_, idx, w, true, options_.quad_degree);
    double r_ab, r_ba;
    upwind_weights(scheme_, data.gamma, edge.d, data.mu, r_ab, r_ba);
    const double wa = w[edge.a], wb = w[edge.b];
    const double m = edge.m, d = edge.d;

    const double z = data.mu > 0.0 ? data.gamma * d / data.mu : 0.0;
    const double drdz_ab = data.mu > 0.0 ? scheme_.dr(z) : 0.0;
    const double drdz_ba = data.mu > 0.0 ? scheme_.dr(-z) : 0.0;

    // Direct dependence on the endpoint values.
    if (diagram_->kind() == DualKind::voronoi) {
      const double k_diff = data.mu * m / d;
      push(edge.a, edge.a, k_diff);
      push(edge.a, edge.b, -k_diff);
      push(edge.b, edge.b, k_diff);
      push(edge.b, edge.a, -k_diff);
    }
    if (divfree_active_) {
      push(edge.a, edge.a, r_ab * data.gamma * m);
      push(edge.a, edge.b, (1.0 - r_ab) * data.gamma * m);
      push(edge.b, edge.b, -r_ba * data.gamma * m);
      push(edge.b, edge.a, -(1.0 - r_ba) * data.gamma * m);
    } else {
      push(edge.a, edge.a, -(1.0 - r_ab) * data.gamma * m);
      push(edge.a, edge.b, (1.0 - r_ab) * data.gamma * m);
      push(edge.b, edge.b, (1.0 - r_ba) * data.gamma * m);
      push(edge.b, edge.a, -(1.0 - r_ba) * data.gamma * m);
    }

    // Chain rule through mu, gamma and the upwind weights.
    for (const auto& dv : data.derivs) {
      const double dz = data.mu > 0.0
                            ? d * (dv.dgamma * data.mu - data.gamma * dv.dmu) / (data.mu * data.mu)
                            : 0.0;
      const double dr_ab = drdz_ab * dz;
      const double dr_ba = -drdz_ba * dz;
      if (diagram_->kind() == DualKind::voronoi) {
        push(edge.a, dv.vertex, dv.dmu * (wa - wb) * m / d);
        push(edge.b, dv.vertex, dv.dmu * (wb - wa) * m / d);
      }
      if (divfree_active_) {
        push(edge.a, dv.vertex,
             m * ((-dr_ab * wb + dr_ab * wa) * data.gamma +
                  ((1.0 - r_ab) * wb + r_ab * wa) * dv.dgamma));
        push(edge.b, dv.vertex,
             -m * ((-dr_ba * wa + dr_ba * wb) * data.gamma +
                   ((1.0 - r_ba) * wa + r_ba * wb) * dv.dgamma));
      } else {
        push(edge.a, dv.vertex,
             m * (dr_ab * data.gamma * (wa - wb) - (1.0 - r_ab) * dv.dgamma * (wa - wb)));
        push(edge.b, dv.vertex,
             m * (-dr_ba * data.gamma * (wb - wa) + (1.0 - r_ba) * dv.dgamma * (wb - wa)));
      }
    }
  }

  if (diagram_->kind() == DualKind::donald) {
    const TriangleRule& rule = triangle_rule(options_.quad_degree);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.element(e);
      const auto grads = basis_gradients(mesh, e);
      const Vec2 gw = w.gradient(e);
      const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
      for (const auto& q :
           map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
        const double wq = w.eval(e, q.x);
        const Mat2 Aq = coeffs_.diffusion(q.x, wq);
        const Mat2 dAq = coeffs_.diffusion_ds(q.x, wq);
        const auto lambda = bm(q.x);
        for (int i = 0; i < 3; ++i) {
          for (int k = 0; k < 3; ++k) {
            push(t[i], t[k],
                 q.w * (dot(Aq * grads[k], grads[i]) + lambda[k] * dot(dAq * gw, grads[i])));
          }
        }
      }
    }
  }

  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (equation_of_[i] < 0) continue;
    const double ci = coeffs_.c(mesh.vertex(i), w[i]);
    const double dci = coeffs_.dc(mesh.vertex(i), w[i]);
    push(i, i, (ci + dci * w[i]) * diagram_->m_i(i));
  }

  SpMat J(num_unknowns(), num_unknowns());
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

SpMat DiscreteSystem::jacobian_fd(const P1Field& w) const {
  const int n = num_unknowns();
  std::vector<Eigen::Triplet<double>> trip;
  P1Field wp = w;
  for (int col = 0; col < n; ++col) {
    const int vertex = unknowns_[col];
    const double step = 1e-7 * (1.0 + std::abs(w[vertex]));
    wp[vertex] = w[vertex] + step;
    const Eigen::VectorXd Fp = residual(wp);
    wp[vertex] = w[vertex] - step;
    const Eigen::VectorXd Fm = residual(wp);
    wp[vertex] = w[vertex];
    for (int row = 0; row < n; ++row) {
      const double val = (Fp[row] - Fm[row]) / (2.0 * step);
      if (val != 0.0) trip.emplace_back(row, col, val);
    }
  }
  SpMat J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double DiscreteSystem::form_diffusion(const P1Field& w, const P1Field& v) const {
  const Mesh& mesh = diagram_->mesh();
  double s = 0.0;
  if (diagram_->kind() == DualKind::voronoi) {
    for (int idx = 0; idx < diagram_->num_edges(); ++idx) {
      const DualDiagram::Edge& edge = diagram_->edge(idx);
      const auto data = edge_coefficient(coeffs_, *diagram_, idx, w, false, options_.quad_degree);
      const double t_diff = data.mu * (w[edge.a] - w[edge.b]) * edge.m / edge.d;
      if (!mesh.is_boundary_vertex(edge.a)) s += v[edge.a] * t_diff;
      if (!mesh.is_boundary_vertex(edge.b)) s -= v[edge.b] * t_diff;
    }
  } else {
    const TriangleRule& rule = triangle_rule(options_.quad_degree);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.element(e);
      const auto grads = basis_gradients(mesh, e);
      const Vec2 gw = w.gradient(e);
      for (const auto& q :
           map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
        const Vec2 Agw = coeffs_.diffusion(q.x, w.eval(e, q.x)) * gw;
        for (int k = 0; k < 3; ++k)
          if (!mesh.is_boundary_vertex(t[k])) s += q.w * v[t[k]] * dot(Agw, grads[k]);
      }
    }
  }
  return s;
}

double DiscreteSystem::form_convective(const P1Field& w, const P1Field& v) const {
  const Mesh& mesh = diagram_->mesh();
  double s = 0.0;
  for (int idx = 0; idx < diagram_->num_edges(); ++idx) {
    const DualDiagram::Edge& edge = diagram_->edge(idx);
    const auto data = edge_coefficient(coeffs_, *diagram_, idx, w, false, options_.quad_degree);
    double r_ab, r_ba;
    upwind_weights(scheme_, data.gamma, edge.d, data.mu, r_ab, r_ba);
    const double wa = w[edge.a], wb = w[edge.b];
    if (divfree_active_) {
      if (!mesh.is_boundary_vertex(edge.a))
        s += v[edge.a] * ((1.0 - r_ab) * wb + r_ab * wa) * data.gamma * edge.m;
      if (!mesh.is_boundary_vertex(edge.b))
        s -= v[edge.b] * ((1.0 - r_ba) * wa + r_ba * wb) * data.gamma * edge.m;
    } else {
      if (!mesh.is_boundary_vertex(edge.a))
        s += v[edge.a] * ((1.0 - r_ab) * wb - (0.5 - r_ab) * wa) * data.gamma * edge.m;
      if (!mesh.is_boundary_vertex(edge.b))
        s -= v[edge.b] * ((1.0 - r_ba) * wa - (0.5 - r_ba) * wb) * data.gamma * edge.m;
    }
  }
  return s;
}

double DiscreteSystem::form_reactive(const P1Field& w, const P1Field& v) const {
  const Mesh& mesh = diagram_->mesh();
  double s = 0.0;
  for (int i : unknowns_) {
    double val = coeffs_.c(mesh.vertex(i), w[i]) * diagram_->m_i(i);
    if (!divfree_active_) {
      double gamma_sum = 0.0;
      for (int idx : diagram_->vertex_edges(i)) {
        const DualDiagram::Edge& edge = diagram_->edge(idx);
        const auto data = edge_coefficient(coeffs_, *diagram_, idx, w, false, options_.quad_degree);
        gamma_sum += (edge.a == i ? data.gamma : -data.gamma) * edge.m;
      }
      val -= 0.5 * gamma_sum;
    }
    s += val * w[i] * v[i];
  }
  return s;
}

std::vector<double> DiscreteSystem::local_form_parts(const P1Field& w, const P1Field& v) const {
  const Mesh& mesh = diagram_->mesh();
  std::vector<double> parts(mesh.num_elements(), 0.0);

  if (options_.mode == DiscretizationMode::conforming) {
    const TriangleRule& rule = triangle_rule(options_.quad_degree);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& t = mesh.element(e);
      const auto grads = basis_gradients(mesh, e);
      const Vec2 gw = w.gradient(e);
      const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
      double local = 0.0;
      for (const auto& q :
           map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
        const double wq = w.eval(e, q.x);
        const Vec2 Agw = coeffs_.diffusion(q.x, wq) * gw;
        const double conv = dot(coeffs_.b(q.x, wq), gw);
        const double react = coeffs_.c(q.x, wq) * wq;
        const auto lambda = bm(q.x);
        for (int k = 0; k < 3; ++k)
          if (!mesh.is_boundary_vertex(t[k]))
            local += q.w * v[t[k]] * (dot(Agw, grads[k]) + (conv + react) * lambda[k]);
      }
      parts[e] = local;
    }
    return parts;
  }

  // Per-element restriction of the box form: interface measures and box
  // measures restricted to the element.
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    double local = 0.0;

    for (int s : diagram_->element_segments(e)) {
      const DualDiagram::Segment& seg = diagram_->segment(s);
      const DualDiagram::Edge& edge = diagram_->edge(seg.edge);
      const auto data =
          edge_coefficient(coeffs_, *diagram_, seg.edge, w, false, options_.quad_degree);
      double r_ab, r_ba;
      upwind_weights(scheme_, data.gamma, edge.d, data.mu, r_ab, r_ba);
      const double wa = w[edge.a], wb = w[edge.b];
      const double mT = seg.length;
      if (diagram_->kind() == DualKind::voronoi) {
        const double t_diff = data.mu * (wa - wb) * mT / edge.d;
        if (!mesh.is_boundary_vertex(edge.a)) local += v[edge.a] * t_diff;
        if (!mesh.is_boundary_vertex(edge.b)) local -= v[edge.b] * t_diff;
      }
      if (divfree_active_) {
        if (!mesh.is_boundary_vertex(edge.a))
          local += v[edge.a] * ((1.0 - r_ab) * wb + r_ab * wa) * data.gamma * mT;
        if (!mesh.is_boundary_vertex(edge.b))
          local -= v[edge.b] * ((1.0 - r_ba) * wa + r_ba * wb) * data.gamma * mT;
      } else {
        if (!mesh.is_boundary_vertex(edge.a))
          local -= v[edge.a] * (1.0 - r_ab) * data.gamma * (wa - wb) * mT;
        if (!mesh.is_boundary_vertex(edge.b))
          local += v[edge.b] * (1.0 - r_ba) * data.gamma * (wb - wa) * mT;
      }
    }

    if (diagram_->kind() == DualKind::donald) {
      const TriangleRule& rule = triangle_rule(options_.quad_degree);
      const auto grads = basis_gradients(mesh, e);
      const Vec2 gw = w.gradient(e);
      for (const auto& q :
           map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
        const Vec2 Agw = coeffs_.diffusion(q.x, w.eval(e, q.x)) * gw;
        for (int k = 0; k < 3; ++k)
          if (!mesh.is_boundary_vertex(t[k])) local += q.w * v[t[k]] * dot(Agw, grads[k]);
      }
    }

    for (int k = 0; k < 3; ++k) {
      const int i = t[k];
      if (mesh.is_boundary_vertex(i)) continue;
      local += coeffs_.c(mesh.vertex(i), w[i]) * w[i] * v[i] * diagram_->m_i_T(i, e);
    }
    parts[e] = local;
  }
  return parts;
}

SpMat galerkin_linearization(const Coefficients& coeffs, const DiscreteSystem& system,
                             const P1Field& u) {
  const Mesh& mesh = system.mesh();
  const TriangleRule& rule = triangle_rule(system.quad_degree());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(12 * system.num_unknowns());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const auto grads = basis_gradients(mesh, e);
    const Vec2 gu = u.gradient(e);
    const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double uq = u.eval(e, q.x);
      const Mat2 Aq = coeffs.diffusion(q.x, uq);
      const Mat2 dAq = coeffs.diffusion_ds(q.x, uq);
      const Vec2 bq = coeffs.b(q.x, uq);
      const Vec2 dbq = coeffs.db(q.x, uq);
      const double cq = coeffs.c(q.x, uq) + coeffs.dc(q.x, uq) * uq;
      const auto lambda = bm(q.x);
      for (int i = 0; i < 3; ++i) {
        const int row = system.equation_of(t[i]);
        if (row < 0) continue;
        for (int k = 0; k < 3; ++k) {
          const int col = system.equation_of(t[k]);
          if (col < 0) continue;
          const double val =
              q.w * (dot(Aq * grads[k], grads[i]) + lambda[k] * dot(dAq * gu, grads[i]) +
                     dot(bq, grads[k]) * lambda[i] + lambda[k] * dot(dbq, gu) * lambda[i] +
                     cq * lambda[k] * lambda[i]);
          trip.emplace_back(row, col, val);
        }
      }
    }
  }
  SpMat G(system.num_unknowns(), system.num_unknowns());
  G.setFromTriplets(trip.begin(), trip.end());
  return G;
}

}  // namespace fvdwr
