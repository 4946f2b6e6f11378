#include "fvdwr/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "fvdwr/errors.hpp"
#include "fvdwr/quadrature.hpp"

namespace fvdwr {

double primal_residual(const Coefficients& reduced, const P1Field& u, const PointField& v,
                       int quad_degree, std::vector<double>* per_element) {
  std::vector<double> load_parts, form_parts;
  const double load = eval_load(reduced, u.mesh(), v, quad_degree, &load_parts);
  const double form = eval_form_plain(reduced, u, v, quad_degree, &form_parts);
  if (per_element) {
    per_element->resize(load_parts.size());
    for (std::size_t e = 0; e < load_parts.size(); ++e)
      (*per_element)[e] = load_parts[e] - form_parts[e];
  }
  return load - form;
}

double dual_residual(const Coefficients& reduced, const GoalFunctional& goal, const P1Field& u,
                     const P1Field& z, const PointField& w, int quad_degree,
                     std::vector<double>* per_element) {
  std::vector<double> goal_parts, form_parts;
  const double g = eval_goal_derivative(goal, u, w, quad_degree, &goal_parts);
  const double form = eval_form_linearized(reduced, u, w, z, quad_degree, &form_parts);
  if (per_element) {
    per_element->resize(goal_parts.size());
    for (std::size_t e = 0; e < goal_parts.size(); ++e)
      (*per_element)[e] = goal_parts[e] - form_parts[e];
  }
  return g - form;
}

EstimatorWeights recovery_weights(const RecoveredField& z_rec, const RecoveredField& u_rec) {
  return {z_rec.weight(), u_rec.weight()};
}

PointField exact_minus_p1(std::function<double(Vec2)> value, std::function<Vec2(Vec2)> grad,
                          const P1Field& discrete) {
  PointField pf;
  pf.value = [value = std::move(value), &discrete](int e, const Vec2& x) {
    return value(x) - discrete.eval(e, x);
  };
  pf.grad = [grad = std::move(grad), &discrete](int e, const Vec2& x) {
    return grad(x) - discrete.gradient(e);
  };
  return pf;
}

double estimate_eta_T(const Coefficients& reduced, const GoalFunctional& goal, const P1Field& u,
                      const P1Field& z, const EstimatorWeights& weights, int quad_degree,
                      std::vector<double>* per_element) {
  std::vector<double> rho_parts, rho_star_parts;
  const double rho = primal_residual(reduced, u, weights.z_weight, quad_degree, &rho_parts);
  const double rho_star =
      dual_residual(reduced, goal, u, z, weights.u_weight, quad_degree, &rho_star_parts);
  if (per_element) {
    per_element->resize(rho_parts.size());
    for (std::size_t e = 0; e < rho_parts.size(); ++e)
      (*per_element)[e] = 0.5 * (rho_parts[e] + rho_star_parts[e]);
  }
  return 0.5 * (rho + rho_star);
}

double estimate_eta_m(const ModelSplit& split, const P1Field& u, const P1Field& z,
                      int quad_degree, std::vector<double>* per_element) {
  const double defect = eval_model_defect(split, u, z, quad_degree, per_element);
  if (per_element)
    for (double& v : *per_element) v = -v;
  return -defect;
}

namespace {

NcDecomposition nc_conforming(const DiscreteSystem& system, const P1Field& u, const P1Field& z) {
  const Mesh& mesh = system.mesh();
  const TriangleRule& rule = triangle_rule(system.quad_degree());
  NcDecomposition out;
  out.per_element.assign(mesh.num_elements(), 0.0);
  out.eta0i.assign(mesh.num_vertices(), 0.0);
  out.eta1i.assign(mesh.num_vertices(), 0.0);
  out.eta2i.assign(mesh.num_vertices(), 0.0);
  out.eta3i.assign(mesh.num_vertices(), 0.0);

  const auto aT_parts = system.local_form_parts(u, z);
  std::vector<double> a_parts;
  eval_form_plain(system.coeffs(), u, PointField::from_p1(z), system.quad_degree(), &a_parts);

  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const BarycentricMap bm(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    double f_part = 0.0;
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double fq = system.coeffs().f(q.x);
      const auto lambda = bm(q.x);
      double z_interior = 0.0;
      for (int k = 0; k < 3; ++k)
        if (!mesh.is_boundary_vertex(t[k])) z_interior += z[t[k]] * lambda[k];
      f_part += q.w * fq * (z.eval(e, q.x) - z_interior);
    }
    out.per_element[e] = f_part + aT_parts[e] - a_parts[e];
    out.eta_nc += out.per_element[e];
  }
  return out;
}

}  // namespace

NcDecomposition compute_nc_decomposition(const DiscreteSystem& system, const P1Field& u,
                                         const P1Field& z) {
  if (system.mode() == DiscretizationMode::conforming) return nc_conforming(system, u, z);

  const DualDiagram& diagram = system.diagram();
  const Mesh& mesh = diagram.mesh();
  const Coefficients& co = system.coeffs();
  const bool voronoi = diagram.kind() == DualKind::voronoi;
  const bool divfree = system.divfree_active();
  const int quad = system.quad_degree();
  const TriangleRule& tri_rule = triangle_rule(quad);
  const SegmentRule& seg_rule = segment_rule(quad);
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_elements();

  const EdgeCoefficients ec = compute_edge_coefficients(co, diagram, system.scheme(), u, quad);

  NcDecomposition out;
  out.per_element.assign(ne, 0.0);
  out.eta0i.assign(nv, 0.0);
  out.eta1i.assign(nv, 0.0);
  out.eta2i.assign(nv, 0.0);
  out.eta3i.assign(nv, 0.0);

  std::vector<double> f_i(nv), c_lump(nv);
  for (int i = 0; i < nv; ++i) {
    f_i[i] = co.f(mesh.vertex(i));
    c_lump[i] = co.c(mesh.vertex(i), u[i]) * u[i];
  }

  std::vector<double> theta_integral(nv, 0.0);  // int over the box of f + (div B) u - c u
  std::vector<double> delta1_i(nv, 0.0);
  std::vector<double> delta3_i(nv, 0.0);
  std::vector<double> eta1i_sq(nv, 0.0), eta3i_sq(nv, 0.0), eta0i_sq(nv, 0.0);
  std::vector<double> elem_A_mean(ne, 0.0);
  std::vector<double> gamma_m_sum(nv, 0.0);

  std::vector<double> part_f(ne, 0.0), part_forms(ne, 0.0);

  // Volume sweep over the control-volume fragments of every element.
  for (int e = 0; e < ne; ++e) {
    const double hT = mesh.element_diameter(e);
    const Vec2 gu = u.gradient(e);
    const Vec2 gz = z.gradient(e);
    double A_w_sum = 0.0, w_sum = 0.0;
    double I1 = 0.0, I2 = 0.0, I3 = 0.0, I4 = 0.0;

    for (int fidx : diagram.element_fragments(e)) {
      const auto& frag = diagram.fragment(fidx);
      if (frag.area == 0.0) continue;
      const int i = frag.vertex;
      for (const auto& q : map_to_triangle(tri_rule, frag.tri[0], frag.tri[1], frag.tri[2])) {
        const double uq = u.eval(e, q.x);
        const double zq = z.eval(e, q.x);
        const double fq = co.f(q.x);
        const Vec2 bq = co.b(q.x, uq);
        const double cq = co.c(q.x, uq);
        const double conv = dot(bq, gu);

        I1 += q.w * fq * zq;
        I3 += q.w * conv * zq;
        I4 += q.w * cq * uq * zq;
        if (voronoi) {
          const double Auz = dot(co.diffusion(q.x, uq) * gu, gz);
          I2 += q.w * Auz;
          if (!co.matrix_valued) {
            A_w_sum += q.w * co.A(q.x, uq);
            w_sum += q.w;
          }
        }

        const double g = fq - conv - cq * uq;
        delta1_i[i] += q.w * g * (zq - z[i]);
        eta1i_sq[i] += hT * hT * q.w * g * g;
        theta_integral[i] += q.w * (fq + co.composed_div_b(q.x, uq, gu) * uq - cq * uq);
      }
    }
    if (voronoi && w_sum > 0.0) elem_A_mean[e] = A_w_sum / w_sum;

    // Localized discrete form minus localized continuous form. The exact
    // piecewise-linear diffusion of Donald diagrams cancels identically and
    // is omitted on both sides.
    double aT_local = 0.0;
    const auto& t = mesh.element(e);
    for (int k = 0; k < 3; ++k) {
      const int i = t[k];
      if (!mesh.is_boundary_vertex(i)) aT_local += c_lump[i] * z[i] * diagram.m_i_T(i, e);
    }

    for (int k = 0; k < 3; ++k) {
      const int sidx = diagram.element_segments(e)[k];
      const DualDiagram::Segment& seg = diagram.segment(sidx);
      const DualDiagram::Edge& edge = diagram.edge(seg.edge);
      const int a = edge.a, b = edge.b;
      const double gamma = ec.gamma_ab[seg.edge];
      const double r_ab = ec.r_ab[seg.edge];
      const double r_ba = ec.r_ba[seg.edge];
      const double len = seg.length;

      if (voronoi && len > 0.0) {
        const double t_diff = ec.mu[seg.edge] * (u[a] - u[b]) * len / edge.d;
        aT_local += t_diff * (z[a] - z[b]);
      }
      if (len > 0.0) {
        if (divfree) {
          aT_local += ((1.0 - r_ab) * u[b] + r_ab * u[a]) * gamma * len * z[a];
          aT_local -= ((1.0 - r_ba) * u[a] + r_ba * u[b]) * gamma * len * z[b];
        } else {
          aT_local -= (1.0 - r_ab) * gamma * (u[a] - u[b]) * len * z[a];
          aT_local += (1.0 - r_ba) * gamma * (u[b] - u[a]) * len * z[b];
        }
      }

      // Interface terms of the convective decomposition: the upwind face
      // value against the exact flux through the segment.
      if (len > 0.0) {
        double flux_a = 0.0;  // int over the segment of (outward-of-a normal . b(x,u)) u
        for (const auto& q : map_to_segment(seg_rule, seg.p0, seg.p1)) {
          const double uq = u.eval(e, q.x);
          flux_a += q.w * dot(seg.normal, co.b(q.x, uq)) * uq;
        }
        const double Z_ab = (r_ab * u[a] + (1.0 - r_ab) * u[b]) * gamma * len - flux_a;
        const double Z_ba = -((r_ba * u[b] + (1.0 - r_ba) * u[a]) * gamma * len - flux_a);
        delta3_i[a] += 0.5 * Z_ab * (z[a] - z[b]);
        delta3_i[b] += 0.5 * Z_ba * (z[b] - z[a]);
        // Fragment of the pair on each side.
        const auto& frag_a = diagram.fragment(diagram.element_fragments(e)[2 * k]);
        const auto& frag_b = diagram.fragment(diagram.element_fragments(e)[2 * k + 1]);
        const double area_a = frag_a.vertex == a ? frag_a.area : frag_b.area;
        const double area_b = frag_a.vertex == b ? frag_a.area : frag_b.area;
        if (area_a > 0.0) eta3i_sq[a] += 0.25 * edge.d * edge.d / area_a * Z_ab * Z_ab;
        if (area_b > 0.0) eta3i_sq[b] += 0.25 * edge.d * edge.d / area_b * Z_ba * Z_ba;
      }
    }

    double mT_f = 0.0;
    for (int k = 0; k < 3; ++k) {
      const int i = t[k];
      mT_f += f_i[i] * z[i] * diagram.m_i_T(i, e);
    }
    part_f[e] = I1 - mT_f;
    part_forms[e] = aT_local - (voronoi ? I2 : 0.0) - I3 - I4;
    out.per_element[e] = part_f[e] + part_forms[e];
    out.eta_nc += out.per_element[e];
  }

  // Edge sweep: gamma sums for theta and the transmissibility-consistency
  // indicator (scalar Voronoi only).
  for (int idx = 0; idx < diagram.num_edges(); ++idx) {
    const DualDiagram::Edge& edge = diagram.edge(idx);
    if (edge.m == 0.0) continue;
    gamma_m_sum[edge.a] += ec.gamma_ab[idx] * edge.m;
    gamma_m_sum[edge.b] -= ec.gamma_ab[idx] * edge.m;

    if (voronoi && !co.matrix_valued) {
      double a_face = 0.0;  // int over the interface of the element means of A
      for (int s : diagram.edge_segments(idx)) {
        const DualDiagram::Segment& seg = diagram.segment(s);
        a_face += elem_A_mean[seg.element] * seg.length;
      }
      const double mismatch = ec.mu[idx] - a_face / edge.m;
      const double du = u[edge.a] - u[edge.b];
      const double contrib = mismatch * mismatch * du * du * edge.m / edge.d;
      eta0i_sq[edge.a] += 0.25 * contrib;
      eta0i_sq[edge.b] += 0.25 * contrib;
      out.delta0_symmetrized +=
          mismatch * du * (z[edge.a] - z[edge.b]) * edge.m / edge.d;
    }
  }

  // Assemble the deltas.
  if (voronoi) {
    double diff_rows = 0.0, diff_vol = 0.0;
    for (int e = 0; e < ne; ++e) {
      for (int k = 0; k < 3; ++k) {
        const int sidx = diagram.element_segments(e)[k];
        const DualDiagram::Segment& seg = diagram.segment(sidx);
        if (seg.length == 0.0) continue;
        const DualDiagram::Edge& edge = diagram.edge(seg.edge);
        diff_rows += ec.mu[seg.edge] * (u[edge.a] - u[edge.b]) * seg.length / edge.d *
                     (z[edge.a] - z[edge.b]);
      }
      const Vec2 gu = u.gradient(e);
      const Vec2 gz = z.gradient(e);
      for (int fidx : diagram.element_fragments(e)) {
        const auto& frag = diagram.fragment(fidx);
        if (frag.area == 0.0) continue;
        for (const auto& q : map_to_triangle(tri_rule, frag.tri[0], frag.tri[1], frag.tri[2]))
          diff_vol += q.w * dot(co.diffusion(q.x, u.eval(e, q.x)) * gu, gz);
      }
    }
    out.delta0 = diff_rows - diff_vol;
  }

  for (int i = 0; i < nv; ++i) {
    out.delta1 += delta1_i[i];
    out.delta3 += delta3_i[i];
    out.eta1i[i] = std::sqrt(eta1i_sq[i]);
    out.eta3i[i] = std::sqrt(eta3i_sq[i]);
    out.eta0i[i] = std::sqrt(eta0i_sq[i]);
    if (!mesh.is_boundary_vertex(i)) {
      const double m_i = diagram.m_i(i);
      double theta = theta_integral[i] + (-f_i[i] + c_lump[i]) * m_i;
      if (!divfree) theta -= u[i] * gamma_m_sum[i];
      out.delta2 += z[i] * theta;
      out.eta2i[i] = m_i > 0.0 ? std::abs(theta) / std::sqrt(m_i) : 0.0;
    }
  }

  auto l2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  out.eta0 = l2(out.eta0i);
  out.eta1 = l2(out.eta1i);
  out.eta2 = l2(out.eta2i);
  out.eta3 = l2(out.eta3i);
  return out;
}

ErrorReport assemble_error_report(const DiscreteSystem& system, const ModelSplit& split,
                                  const GoalFunctional& goal, const P1Field& u, const P1Field& z,
                                  const EstimatorWeights& weights) {
  const int quad = system.quad_degree();
  ErrorReport report;
  report.eta_T = estimate_eta_T(split.reduced, goal, u, z, weights, quad, &report.element_eta_T);
  report.eta_m = estimate_eta_m(split, u, z, quad, &report.element_eta_m);
  report.nc = compute_nc_decomposition(system, u, z);
  report.eta_nc = report.nc.eta_nc;
  report.element_eta_nc = report.nc.per_element;
  report.goal_value = eval_goal(goal, u, quad);

  const Mesh& mesh = system.mesh();
  const DualDiagram& diagram = system.diagram();
  report.element_indicators.assign(mesh.num_elements(), 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    double ind = std::abs(report.element_eta_T[e]) + std::abs(report.element_eta_m[e]);
    for (int i : mesh.element(e)) {
      const double m_i = diagram.m_i(i);
      if (m_i <= 0.0) continue;
      const double node_sum =
          report.nc.eta0i[i] + report.nc.eta1i[i] + report.nc.eta2i[i] + report.nc.eta3i[i];
      ind += diagram.m_i_T(i, e) / m_i * node_sum;
    }
    report.element_indicators[e] = ind;
  }
  return report;
}

double effectivity(const ErrorReport& report, double reference_goal) {
  const double true_error = reference_goal - report.goal_value;
  if (std::abs(true_error) < 1e-14) throw ZeroTrueError();
  return report.total() / true_error;
}

}  // namespace fvdwr
