#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fvdwr/field.hpp"
#include "fvdwr/geometry.hpp"
#include "fvdwr/mesh.hpp"

namespace fvdwr {

struct StateRange {
  double lo = -1.0;
  double hi = 1.0;
};

// Coefficient callbacks of the quasilinear operator
//   -div(A(x,u) grad u) + b(x,u) . grad u + c(x,u) u = f,   u = 0 on the boundary,
// together with their state derivatives (for Newton and the linearized dual
// form). All callbacks must be total on the closed domain times state_range.
struct Coefficients {
  std::function<double(Vec2, double)> A;    // scalar diffusion
  std::function<double(Vec2, double)> dA;   // d/ds
  bool matrix_valued = false;
  std::function<Mat2(Vec2, double)> A_mat;  // used instead of A when matrix_valued
  std::function<Mat2(Vec2, double)> dA_mat;
  std::function<Vec2(Vec2, double)> b;
  std::function<Vec2(Vec2, double)> db;     // d/ds
  std::function<double(Vec2, double)> div_b;  // spatial divergence of b
  bool div_b_declared_zero = false;
  std::function<double(Vec2, double)> c;
  std::function<double(Vec2, double)> dc;
  std::function<double(Vec2)> f;
  StateRange state_range;

  // Fills missing callbacks with the natural defaults (A=1, b=0, c=0, f=0).
  void normalize();

  Mat2 diffusion(const Vec2& x, double s) const {
    return matrix_valued ? A_mat(x, s) : Mat2::scalar(A(x, s));
  }
  Mat2 diffusion_ds(const Vec2& x, double s) const {
    return matrix_valued ? dA_mat(x, s) : Mat2::scalar(dA(x, s));
  }
  // Divergence of the composed field x -> b(x, w(x)) on one element.
  double composed_div_b(const Vec2& x, double s, const Vec2& grad_w) const {
    return div_b(x, s) + dot(db(x, s), grad_w);
  }
};

// Splitting of the accurate weak form into the discretized (reduced) part and
// the neglected defect; the defect form is the difference of the two plain
// weak forms. An absent accurate model means a vanishing defect.
struct ModelSplit {
  Coefficients reduced;
  std::optional<Coefficients> accurate;
};

// Output functional j(u) = int G(x, u) dx with derivative j'(u; w) = int G_s(x,u) w dx.
struct GoalFunctional {
  std::string name;
  std::function<double(Vec2, double)> integrand;
  std::function<double(Vec2, double)> d_integrand;
};

// Element-wise evaluable test function with gradient; wraps either a nodal
// field or a recovered-difference weight.
struct PointField {
  std::function<double(int element, const Vec2&)> value;
  std::function<Vec2(int element, const Vec2&)> grad;

  static PointField from_p1(const P1Field& v);
  static PointField from_callable(std::function<double(Vec2)> f, std::function<Vec2(Vec2)> g);
};

// Values of the continuous forms at (w; v), split two ways: the
// skew-symmetrized convection splitting and the plain grouping. Both are
// assembled from the same quadrature points, so a_split = diffusion + b_skew
// + d_form and a_plain = diffusion + convection + reaction hold exactly.
struct FormValues {
  double diffusion = 0.0;   // (A(.,w) grad w, grad v)
  double b_skew = 0.0;      // 1/2 [(b . grad w, v) - (w, b . grad v)]
  double d_form = 0.0;      // (c w, v) - 1/2 (w div b, v)
  double a_split = 0.0;
  double convection = 0.0;  // (b . grad w, v)
  double reaction = 0.0;    // (c w, v)
  double a_plain = 0.0;
};

FormValues eval_continuous_forms(const Coefficients& coeffs, const P1Field& w, const P1Field& v,
                                 int quad_degree = 5,
                                 const std::vector<int>* elements = nullptr);

// Plain-form action a(u; v) for a general test function, with optional
// per-element partial sums.
double eval_form_plain(const Coefficients& coeffs, const P1Field& u, const PointField& v,
                       int quad_degree = 5, std::vector<double>* per_element = nullptr);

// Directional derivative a'(u; w, z) of the plain form, linear in w and z.
double eval_form_linearized(const Coefficients& coeffs, const P1Field& u, const PointField& w,
                            const P1Field& z, int quad_degree = 5,
                            std::vector<double>* per_element = nullptr);

// <f, v> by element quadrature.
double eval_load(const Coefficients& coeffs, const Mesh& mesh, const PointField& v,
                 int quad_degree = 5, std::vector<double>* per_element = nullptr);

// Defect form a_delta(w; v) = a_accurate(w; v) - a_reduced(w; v).
double eval_model_defect(const ModelSplit& split, const P1Field& w, const P1Field& v,
                         int quad_degree = 5, std::vector<double>* per_element = nullptr);

// Defect derivative a_delta'(w; d, v).
double eval_model_defect_linearized(const ModelSplit& split, const P1Field& w, const PointField& d,
                                    const P1Field& v, int quad_degree = 5);

double eval_goal(const GoalFunctional& goal, const P1Field& u, int quad_degree = 5);
double eval_goal_derivative(const GoalFunctional& goal, const P1Field& u, const PointField& w,
                            int quad_degree = 5, std::vector<double>* per_element = nullptr);

// A catalog entry: model split, manufactured solution when available, and the
// admissible state interval.
struct Problem {
  std::string name;
  ModelSplit split;
  bool has_exact = false;
  std::function<double(Vec2)> exact_u;
  std::function<Vec2(Vec2)> exact_grad;

  const Coefficients& reduced() const { return split.reduced; }
};

// Catalog names: p0_polynomial, p1_poisson, p2_convdiff, p3_quasilinear.
// Recognized parameters (with defaults) are problem specific; unknown
// parameter names are rejected.
Problem make_problem(const std::string& name, const std::map<std::string, double>& params = {});

// Goal names: mean_value, weighted_mean, u_squared. The weighted-mean weight
// is selected by psi: "bump" (default) or "p0_load".
GoalFunctional make_goal(const std::string& name, const std::string& psi = "bump");

// j evaluated at the manufactured solution by high-order quadrature on a fine
// grid; throws when the problem has no exact solution.
double reference_goal_value(const Problem& problem, const GoalFunctional& goal);

}  // namespace fvdwr
