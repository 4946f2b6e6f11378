#pragma once

#include <optional>
#include <vector>

#include "fvdwr/assembly.hpp"
#include "fvdwr/field.hpp"
#include "fvdwr/problem.hpp"
#include "fvdwr/recovery.hpp"

namespace fvdwr {

// Primal residual rho(u; v) = <f, v> - a(u; v) of the reduced model, plain
// form, element quadrature.
double primal_residual(const Coefficients& reduced, const P1Field& u, const PointField& v,
                       int quad_degree = 5, std::vector<double>* per_element = nullptr);

// Dual residual rho*(u; z, w) = j'(u; w) - a'(u; w, z).
double dual_residual(const Coefficients& reduced, const GoalFunctional& goal, const P1Field& u,
                     const P1Field& z, const PointField& w, int quad_degree = 5,
                     std::vector<double>* per_element = nullptr);

// Interpolation-error weights for the two residuals. Defaults come from the
// patchwise quadratic recovery; exact fields can be injected instead (the
// weight is then exact_field - discrete_field).
struct EstimatorWeights {
  PointField z_weight;  // approximates z - i_T z
  PointField u_weight;  // approximates u - i_T u
};

EstimatorWeights recovery_weights(const RecoveredField& z_rec, const RecoveredField& u_rec);
PointField exact_minus_p1(std::function<double(Vec2)> value, std::function<Vec2(Vec2)> grad,
                          const P1Field& discrete);

// Conforming discretization-error part,
// eta_T = 1/2 [ rho(u; z_weight) + rho*(u; z, u_weight) ].
double estimate_eta_T(const Coefficients& reduced, const GoalFunctional& goal, const P1Field& u,
                      const P1Field& z, const EstimatorWeights& weights, int quad_degree = 5,
                      std::vector<double>* per_element = nullptr);

// Modeling-error part eta_m = -a_delta(u; z).
double estimate_eta_m(const ModelSplit& split, const P1Field& u, const P1Field& z,
                      int quad_degree = 5, std::vector<double>* per_element = nullptr);

// Nonconformity estimator and its node-indicator decomposition.
//
// eta_nc = <f,z> - <f_T,z> - a(u;z) + a_T(u;z) is evaluated through its exact
// element-localized form; delta0..delta3 regroup the same quadrature sums by
// control volumes, so delta0+delta1+delta2+delta3 = eta_nc up to roundoff
// (the convective flux rewriting is exact for polynomial integrands).
struct NcDecomposition {
  double eta_nc = 0.0;
  std::vector<double> per_element;  // signed parts, sum to eta_nc
  double delta0 = 0.0, delta1 = 0.0, delta2 = 0.0, delta3 = 0.0;
  double delta0_symmetrized = 0.0;  // diagnostic: pairwise form of delta0
  std::vector<double> eta0i, eta1i, eta2i, eta3i;  // per-vertex indicators
  double eta0 = 0.0, eta1 = 0.0, eta2 = 0.0, eta3 = 0.0;

  double delta_sum() const { return delta0 + delta1 + delta2 + delta3; }
  double eta_sum() const { return eta0 + eta1 + eta2 + eta3; }
};

NcDecomposition compute_nc_decomposition(const DiscreteSystem& system, const P1Field& u,
                                         const P1Field& z);

// Complete goal-error report.
struct ErrorReport {
  double eta_T = 0.0;
  double eta_m = 0.0;
  double eta_nc = 0.0;
  double goal_value = 0.0;  // j(u_Tm)
  NcDecomposition nc;
  std::vector<double> element_eta_T;   // signed element partials
  std::vector<double> element_eta_m;
  std::vector<double> element_eta_nc;
  std::vector<double> element_indicators;  // nonnegative marking indicators
  std::optional<double> effectivity_value;

  double total() const { return eta_T + eta_m + eta_nc; }
};

ErrorReport assemble_error_report(const DiscreteSystem& system, const ModelSplit& split,
                                  const GoalFunctional& goal, const P1Field& u, const P1Field& z,
                                  const EstimatorWeights& weights);

// Signed effectivity (eta_T + eta_m + eta_nc) / (reference - j(u_Tm)); throws
// ZeroTrueError when the true error is numerically zero.
double effectivity(const ErrorReport& report, double reference_goal);

}  // namespace fvdwr
