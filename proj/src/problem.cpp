#include "fvdwr/problem.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "fvdwr/errors.hpp"
#include "fvdwr/quadrature.hpp"

namespace fvdwr {

namespace {
constexpr double kPi = std::numbers::pi;
}

void Coefficients::normalize() {
  if (!A) A = [](Vec2, double) { return 1.0; };
  if (!dA) dA = [](Vec2, double) { return 0.0; };
  if (matrix_valued) {
    if (!A_mat) A_mat = [](Vec2, double) { return Mat2::identity(); };
    if (!dA_mat) dA_mat = [](Vec2, double) { return Mat2{}; };
  }
  if (!b) b = [](Vec2, double) { return Vec2{0.0, 0.0}; };
  if (!db) db = [](Vec2, double) { return Vec2{0.0, 0.0}; };
  if (!div_b) div_b = [](Vec2, double) { return 0.0; };
  if (!c) c = [](Vec2, double) { return 0.0; };
  if (!dc) dc = [](Vec2, double) { return 0.0; };
  if (!f) f = [](Vec2) { return 0.0; };
}

PointField PointField::from_p1(const P1Field& v) {
  PointField pf;
  pf.value = [&v](int e, const Vec2& x) { return v.eval(e, x); };
  pf.grad = [&v](int e, const Vec2&) { return v.gradient(e); };
  return pf;
}

PointField PointField::from_callable(std::function<double(Vec2)> f, std::function<Vec2(Vec2)> g) {
  PointField pf;
  pf.value = [f = std::move(f)](int, const Vec2& x) { return f(x); };
  pf.grad = [g = std::move(g)](int, const Vec2& x) { return g(x); };
  return pf;
}

FormValues eval_continuous_forms(const Coefficients& coeffs, const P1Field& w, const P1Field& v,
                                 int quad_degree, const std::vector<int>* elements) {
  const Mesh& mesh = w.mesh();
  const TriangleRule& rule = triangle_rule(quad_degree);
  FormValues out;

  auto handle = [&](int e) {
    const auto& t = mesh.element(e);
    const Vec2 gw = w.gradient(e);
    const Vec2 gv = v.gradient(e);
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double wq = w.eval(e, q.x);
      const double vq = v.eval(e, q.x);
      const Vec2 Agw = coeffs.diffusion(q.x, wq) * gw;
      const Vec2 bq = coeffs.b(q.x, wq);
      const double cq = coeffs.c(q.x, wq);
      out.diffusion += q.w * dot(Agw, gv);
      out.b_skew += q.w * 0.5 * (dot(bq, gw) * vq - wq * dot(bq, gv));
      out.d_form += q.w * (cq * wq * vq - 0.5 * wq * coeffs.composed_div_b(q.x, wq, gw) * vq);
      out.convection += q.w * dot(bq, gw) * vq;
      out.reaction += q.w * cq * wq * vq;
    }
  };

  if (elements) {
    for (int e : *elements) handle(e);
  } else {
    for (int e = 0; e < mesh.num_elements(); ++e) handle(e);
  }
  out.a_split = out.diffusion + out.b_skew + out.d_form;
  out.a_plain = out.diffusion + out.convection + out.reaction;
  return out;
}

double eval_form_plain(const Coefficients& coeffs, const P1Field& u, const PointField& v,
                       int quad_degree, std::vector<double>* per_element) {
  const Mesh& mesh = u.mesh();
  const TriangleRule& rule = triangle_rule(quad_degree);
  if (per_element) per_element->assign(mesh.num_elements(), 0.0);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const Vec2 gu = u.gradient(e);
    double local = 0.0;
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double uq = u.eval(e, q.x);
      const double vq = v.value(e, q.x);
      const Vec2 gv = v.grad(e, q.x);
      local += q.w * (dot(coeffs.diffusion(q.x, uq) * gu, gv) +
                      dot(coeffs.b(q.x, uq), gu) * vq + coeffs.c(q.x, uq) * uq * vq);
    }
    total += local;
    if (per_element) (*per_element)[e] = local;
  }
  return total;
}

double eval_form_linearized(const Coefficients& coeffs, const P1Field& u, const PointField& w,
                            const P1Field& z, int quad_degree, std::vector<double>* per_element) {
  const Mesh& mesh = u.mesh();
  const TriangleRule& rule = triangle_rule(quad_degree);
  if (per_element) per_element->assign(mesh.num_elements(), 0.0);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const Vec2 gu = u.gradient(e);
    const Vec2 gz = z.gradient(e);
    double local = 0.0;
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      const double uq = u.eval(e, q.x);
      const double wq = w.value(e, q.x);
      const Vec2 gw = w.grad(e, q.x);
      const double zq = z.eval(e, q.x);
      local += q.w * (dot(coeffs.diffusion(q.x, uq) * gw, gz) +
                      wq * dot(coeffs.diffusion_ds(q.x, uq) * gu, gz) +
                      dot(coeffs.b(q.x, uq), gw) * zq +
                      wq * dot(coeffs.db(q.x, uq), gu) * zq +
                      (coeffs.c(q.x, uq) + coeffs.dc(q.x, uq) * uq) * wq * zq);
    }
    total += local;
    if (per_element) (*per_element)[e] = local;
  }
  return total;
}

double eval_load(const Coefficients& coeffs, const Mesh& mesh, const PointField& v,
                 int quad_degree, std::vector<double>* per_element) {
  const TriangleRule& rule = triangle_rule(quad_degree);
  if (per_element) per_element->assign(mesh.num_elements(), 0.0);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    double local = 0.0;
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      local += q.w * coeffs.f(q.x) * v.value(e, q.x);
    }
    total += local;
    if (per_element) (*per_element)[e] = local;
  }
  return total;
}

double eval_model_defect(const ModelSplit& split, const P1Field& w, const P1Field& v,
                         int quad_degree, std::vector<double>* per_element) {
  if (per_element) per_element->assign(w.mesh().num_elements(), 0.0);
  if (!split.accurate) return 0.0;
  std::vector<double> acc, red;
  const PointField test = PointField::from_p1(v);
  eval_form_plain(*split.accurate, w, test, quad_degree, &acc);
  eval_form_plain(split.reduced, w, test, quad_degree, &red);
  double total = 0.0;
  for (std::size_t e = 0; e < acc.size(); ++e) {
    const double local = acc[e] - red[e];
    total += local;
    if (per_element) (*per_element)[e] = local;
  }
  return total;
}

double eval_model_defect_linearized(const ModelSplit& split, const P1Field& w, const PointField& d,
                                    const P1Field& v, int quad_degree) {
  if (!split.accurate) return 0.0;
  return eval_form_linearized(*split.accurate, w, d, v, quad_degree) -
         eval_form_linearized(split.reduced, w, d, v, quad_degree);
}

double eval_goal(const GoalFunctional& goal, const P1Field& u, int quad_degree) {
  const Mesh& mesh = u.mesh();
  const TriangleRule& rule = triangle_rule(quad_degree);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      total += q.w * goal.integrand(q.x, u.eval(e, q.x));
    }
  }
  return total;
}

double eval_goal_derivative(const GoalFunctional& goal, const P1Field& u, const PointField& w,
                            int quad_degree, std::vector<double>* per_element) {
  const Mesh& mesh = u.mesh();
  const TriangleRule& rule = triangle_rule(quad_degree);
  if (per_element) per_element->assign(mesh.num_elements(), 0.0);
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    double local = 0.0;
    for (const auto& q :
         map_to_triangle(rule, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]))) {
      local += q.w * goal.d_integrand(q.x, u.eval(e, q.x)) * w.value(e, q.x);
    }
    total += local;
    if (per_element) (*per_element)[e] = local;
  }
  return total;
}

namespace {

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback, std::set<std::string>& seen) {
  seen.insert(key);
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const std::string& name, const std::map<std::string, double>& params,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : params) {
    if (!known.count(key))
      throw ConfigError("problem " + name + ": unknown parameter '" + key + "'");
  }
}

Problem make_p0(const std::map<std::string, double>& params) {
  std::set<std::string> known;
  reject_unknown("p0_polynomial", params, known);
  Problem p;
  p.name = "p0_polynomial";
  Coefficients& co = p.split.reduced;
  co.f = [](Vec2 x) { return 2.0 * (x.y * (1.0 - x.y) + x.x * (1.0 - x.x)); };
  co.state_range = {-0.1, 0.2};
  co.div_b_declared_zero = true;
  co.normalize();
  p.has_exact = true;
  p.exact_u = [](Vec2 x) { return x.x * (1.0 - x.x) * x.y * (1.0 - x.y); };
  p.exact_grad = [](Vec2 x) {
    return Vec2{(1.0 - 2.0 * x.x) * x.y * (1.0 - x.y), x.x * (1.0 - x.x) * (1.0 - 2.0 * x.y)};
  };
  return p;
}

Problem make_p1(const std::map<std::string, double>& params) {
  std::set<std::string> known;
  reject_unknown("p1_poisson", params, known);
  Problem p;
  p.name = "p1_poisson";
  Coefficients& co = p.split.reduced;
  co.f = [](Vec2 x) { return 2.0 * kPi * kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  co.state_range = {-0.1, 1.1};
  co.div_b_declared_zero = true;
  co.normalize();
  p.has_exact = true;
  p.exact_u = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  p.exact_grad = [](Vec2 x) {
    return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
  };
  return p;
}

Problem make_p2(const std::map<std::string, double>& params) {
  std::set<std::string> known;
  const double eps = get_param(params, "eps", 1.0, known);
  const double c0 = get_param(params, "c0", 1.0, known);
  reject_unknown("p2_convdiff", params, known);
  if (!(eps > 0.0)) throw ConfigError("p2_convdiff needs eps > 0");
  if (c0 < 0.0) throw ConfigError("p2_convdiff needs c0 >= 0");

  Problem p;
  p.name = "p2_convdiff";
  Coefficients& co = p.split.reduced;
  co.A = [eps](Vec2, double) { return eps; };
  co.b = [](Vec2, double) { return Vec2{1.0, 0.0}; };
  co.c = [c0](Vec2, double) { return c0; };
  co.div_b_declared_zero = true;
  co.f = [eps, c0](Vec2 x) {
    const double u = std::sin(kPi * x.x) * std::sin(kPi * x.y);
    return 2.0 * kPi * kPi * eps * u + kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y) + c0 * u;
  };
  co.state_range = {-0.5, 1.5};
  co.normalize();
  p.has_exact = true;
  p.exact_u = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  p.exact_grad = [](Vec2 x) {
    return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
  };
  return p;
}

Problem make_p3(const std::map<std::string, double>& params) {
  std::set<std::string> known;
  const double eps0 = get_param(params, "eps0", 1.0, known);
  const double eps_xy = get_param(params, "eps_xy", 0.5, known);
  const double c0 = get_param(params, "c0", 1.0, known);
  const double gamma = get_param(params, "gamma", 3.0, known);
  const double gamma0 = get_param(params, "gamma0", 2.0, known);
  const double s0 = get_param(params, "s0", 1.0, known);
  const double w0 = get_param(params, "w0", std::nan(""), known);
  const double b0x = get_param(params, "b0x", 0.0, known);
  const double b0y = get_param(params, "b0y", 0.0, known);
  reject_unknown("p3_quasilinear", params, known);
  if (!(eps0 > 0.0) || eps_xy < 0.0) throw ConfigError("p3_quasilinear needs eps0 > 0, eps_xy >= 0");
  if (c0 < 0.0) throw ConfigError("p3_quasilinear needs c0 >= 0");
  if (gamma < 1.0 || gamma0 < 1.0) throw ConfigError("p3_quasilinear needs gamma, gamma0 >= 1");
  if (s0 < 0.0) throw ConfigError("p3_quasilinear needs s0 >= 0");

  auto eps = [eps0, eps_xy](Vec2 x) { return eps0 * (1.0 + eps_xy * x.x * x.y); };
  auto grad_eps = [eps0, eps_xy](Vec2 x) { return Vec2{eps0 * eps_xy * x.y, eps0 * eps_xy * x.x}; };
  const Vec2 b0{b0x, b0y};

  // The state enters through |s0 + w|^exponent; the reference level s0 > 0
  // keeps the diffusion uniformly elliptic under the homogeneous Dirichlet
  // condition (s0 = 0 recovers the degenerate form).
  auto pow_abs = [s0](double s, double e) { return std::pow(std::abs(s0 + s), e); };
  auto dpow_abs = [s0](double s, double e) {
    const double t = s0 + s;
    if (t == 0.0) return 0.0;
    return e * std::pow(std::abs(t), e - 1.0) * (t > 0 ? 1.0 : -1.0);
  };

  Problem p;
  p.name = "p3_quasilinear";

  Coefficients accurate;
  accurate.A = [eps, pow_abs, gamma](Vec2 x, double s) { return eps(x) * pow_abs(s, gamma); };
  accurate.dA = [eps, dpow_abs, gamma](Vec2 x, double s) { return eps(x) * dpow_abs(s, gamma); };
  accurate.b = [b0, pow_abs, gamma](Vec2, double s) { return b0 * pow_abs(s, gamma / 2.0); };
  accurate.db = [b0, dpow_abs, gamma](Vec2, double s) { return b0 * dpow_abs(s, gamma / 2.0); };
  accurate.c = [c0](Vec2, double) { return c0; };
  accurate.div_b_declared_zero = true;  // b0 constant, divergence is a pure state chain
  accurate.state_range = {-0.4, 1.2};

  Coefficients reduced;
  if (std::isnan(w0)) {
    // Reduced model: exponent frozen to gamma0, state dependence kept.
    reduced.A = [eps, pow_abs, gamma0](Vec2 x, double s) { return eps(x) * pow_abs(s, gamma0); };
    reduced.dA = [eps, dpow_abs, gamma0](Vec2 x, double s) { return eps(x) * dpow_abs(s, gamma0); };
    reduced.b = [b0, pow_abs, gamma0](Vec2, double s) { return b0 * pow_abs(s, gamma0 / 2.0); };
    reduced.db = [b0, dpow_abs, gamma0](Vec2, double s) { return b0 * dpow_abs(s, gamma0 / 2.0); };
  } else {
    // Fully frozen coefficients at the linearization state w0.
    reduced.A = [eps, pow_abs, gamma0, w0](Vec2 x, double) { return eps(x) * pow_abs(w0, gamma0); };
    reduced.b = [b0, pow_abs, gamma0, w0](Vec2, double) { return b0 * pow_abs(w0, gamma0 / 2.0); };
  }
  reduced.c = accurate.c;
  reduced.div_b_declared_zero = true;
  reduced.state_range = accurate.state_range;

  // Manufactured solution of the accurate model; s0 + u stays positive on the
  // unit square, so the absolute values drop out of the source term.
  auto u_star = [](Vec2 x) { return std::sin(kPi * x.x) * std::sin(kPi * x.y); };
  auto grad_u_star = [](Vec2 x) {
    return Vec2{kPi * std::cos(kPi * x.x) * std::sin(kPi * x.y),
                kPi * std::sin(kPi * x.x) * std::cos(kPi * x.y)};
  };
  reduced.f = [eps, grad_eps, u_star, grad_u_star, gamma, c0, b0, pow_abs](Vec2 x) {
    const double u = u_star(x);
    const Vec2 gu = grad_u_star(x);
    const double lap_u = -2.0 * kPi * kPi * u;
    const double f_diff = -dot(grad_eps(x), gu) * pow_abs(u, gamma) -
                          eps(x) * gamma * pow_abs(u, gamma - 1.0) * dot(gu, gu) -
                          eps(x) * pow_abs(u, gamma) * lap_u;
    const double f_conv = pow_abs(u, gamma / 2.0) * dot(b0, gu);
    return f_diff + f_conv + c0 * u;
  };
  accurate.f = reduced.f;

  accurate.normalize();
  reduced.normalize();
  p.split.reduced = reduced;
  p.split.accurate = accurate;
  p.has_exact = true;
  p.exact_u = u_star;
  p.exact_grad = grad_u_star;
  return p;
}

}  // namespace

Problem make_problem(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "p0_polynomial") return make_p0(params);
  if (name == "p1_poisson") return make_p1(params);
  if (name == "p2_convdiff") return make_p2(params);
  if (name == "p3_quasilinear") return make_p3(params);
  throw ConfigError("unknown catalog problem: " + name);
}

GoalFunctional make_goal(const std::string& name, const std::string& psi) {
  GoalFunctional g;
  g.name = name;
  if (name == "mean_value") {
    g.integrand = [](Vec2, double s) { return s; };
    g.d_integrand = [](Vec2, double) { return 1.0; };
    return g;
  }
  if (name == "weighted_mean") {
    std::function<double(Vec2)> weight;
    if (psi == "bump") {
      weight = [](Vec2 x) { return 16.0 * x.x * x.y * (1.0 - x.x) * (1.0 - x.y); };
    } else if (psi == "p0_load") {
      weight = [](Vec2 x) { return 2.0 * (x.y * (1.0 - x.y) + x.x * (1.0 - x.x)); };
    } else {
      throw ConfigError("unknown goal weight: " + psi);
    }
    g.name += "(" + psi + ")";
    g.integrand = [weight](Vec2 x, double s) { return weight(x) * s; };
    g.d_integrand = [weight](Vec2 x, double) { return weight(x); };
    return g;
  }
  if (name == "u_squared") {
    g.integrand = [](Vec2, double s) { return s * s; };
    g.d_integrand = [](Vec2, double s) { return 2.0 * s; };
    return g;
  }
  throw ConfigError("unknown goal functional: " + name);
}

double reference_goal_value(const Problem& problem, const GoalFunctional& goal) {
  if (!problem.has_exact)
    throw ConfigError("problem " + problem.name + " has no manufactured solution");
  // Composite degree-8 quadrature of G(x, u(x)) on a fine grid.
  const TriangleRule& rule = triangle_rule(8);
  const int n = 128;
  const Mesh fine = friedrichs_keller(n);
  double total = 0.0;
  for (int e = 0; e < fine.num_elements(); ++e) {
    const auto& t = fine.element(e);
    for (const auto& q :
         map_to_triangle(rule, fine.vertex(t[0]), fine.vertex(t[1]), fine.vertex(t[2]))) {
      total += q.w * goal.integrand(q.x, problem.exact_u(q.x));
    }
  }
  return total;
}

}  // namespace fvdwr
