#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fvdwr/assembly.hpp"
#include "fvdwr/field.hpp"
#include "fvdwr/problem.hpp"

namespace fvdwr {

// Patchwise quadratic reconstruction of a nodal field. Each vertex carries a
// least-squares quadratic over its star (second ring added when the star is
// too small), constrained to interpolate the center value. Evaluation inside
// an element either uses the quadratic of the nearest element vertex (ties
// broken by lowest vertex index) or blends the three vertex quadratics with
// barycentric weights; the blend is globally continuous and is the default
// for estimator weights.
enum class PatchEvaluation { nearest_vertex, blended };

class RecoveredField {
 public:
  explicit RecoveredField(const P1Field& base,
                          PatchEvaluation evaluation = PatchEvaluation::blended);

  const P1Field& base() const { return base_; }
  const Mesh& mesh() const { return base_.mesh(); }

  double evaluate(int element, const Vec2& p) const;
  Vec2 gradient(int element, const Vec2& p) const;

  // Recovered minus base, the interpolation-error weight.
  double diff_value(int element, const Vec2& p) const;
  Vec2 diff_grad(int element, const Vec2& p) const;

  PointField weight() const;  // diff as a PointField

  bool any_rank_deficient() const;
  bool rank_deficient(int vertex) const { return rank_deficient_[vertex] != 0; }

 private:
  int nearest_vertex(int element, const Vec2& p) const;
  double eval_patch(int vertex, const Vec2& p) const;
  Vec2 grad_patch(int vertex, const Vec2& p) const;

  P1Field base_;
  PatchEvaluation evaluation_;
  // Monomial coefficients (1, xi, eta, xi^2, xi*eta, eta^2) in patch-local
  // coordinates (x - center)/scale.
  std::vector<std::array<double, 6>> coeffs_;
  std::vector<double> scales_;
  std::vector<std::uint8_t> rank_deficient_;
};

RecoveredField recover_higher_order(const P1Field& field,
                                    PatchEvaluation evaluation = PatchEvaluation::blended);

enum class DualMethod { galerkin, finite_volume };

// Discrete influence function: solve the transposed Galerkin linearization
// a'(u; w, z) = j'(u; w) for all discrete w (default), or reuse the transposed
// finite-volume Jacobian when method = finite_volume.
P1Field solve_dual(const DiscreteSystem& system, const P1Field& u, const GoalFunctional& goal,
                   DualMethod method = DualMethod::galerkin);

}  // namespace fvdwr
