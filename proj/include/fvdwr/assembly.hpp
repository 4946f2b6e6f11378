#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "fvdwr/dual.hpp"
#include "fvdwr/field.hpp"
#include "fvdwr/problem.hpp"
#include "fvdwr/schemes.hpp"

namespace fvdwr {

using SpMat = Eigen::SparseMatrix<double>;

enum class DiscretizationMode { finite_volume, conforming };
enum class DivfreeVariant { automatic, on, off };

struct SystemOptions {
  DiscretizationMode mode = DiscretizationMode::finite_volume;
  DivfreeVariant divfree = DivfreeVariant::automatic;
  int quad_degree = 5;
};

// Transmissibilities, convective face means and upwind weights per dual edge.
// Orientation: gamma(a->b) is stored; gamma(b->a) = -gamma(a->b).
struct EdgeCoefficients {
  std::vector<double> mu;
  std::vector<double> gamma_ab;
  std::vector<double> r_ab;  // weight for the (a, b) orientation
  std::vector<double> r_ba;
};

EdgeCoefficients compute_edge_coefficients(const Coefficients& coeffs, const DualDiagram& diagram,
                                           const UpwindScheme& scheme, const P1Field& w,
                                           int quad_degree = 5);

// Nonlinear discrete operator with unknowns at the interior vertices. In
// finite-volume mode the operator is the upwinded box scheme on the given
// dual diagram (exact piecewise-linear diffusion for Donald diagrams); in
// conforming mode it is the plain Galerkin discretization, which serves as
// the vanishing-nonconformity reference.
class DiscreteSystem {
 public:
  DiscreteSystem(const DualDiagram& diagram, const UpwindScheme& scheme,
                 const Coefficients& coeffs, SystemOptions options = {});

  const Mesh& mesh() const { return diagram_->mesh(); }
  const DualDiagram& diagram() const { return *diagram_; }
  const UpwindScheme& scheme() const { return scheme_; }
  const Coefficients& coeffs() const { return coeffs_; }
  DiscretizationMode mode() const { return options_.mode; }
  int quad_degree() const { return options_.quad_degree; }
  bool divfree_active() const { return divfree_active_; }

  int num_unknowns() const { return static_cast<int>(unknowns_.size()); }
  const std::vector<int>& unknown_vertices() const { return unknowns_; }
  int equation_of(int vertex) const { return equation_of_[vertex]; }

  // Residual F_i(w) = a_T(w; psi_i) - <f_T, psi_i> over interior vertices.
  Eigen::VectorXd residual(const P1Field& w) const;

  // Operator action rows a_T(w; psi_i) as a full-length vertex vector
  // (boundary rows zero).
  std::vector<double> action_rows(const P1Field& w) const;

  Eigen::VectorXd lumped_rhs() const;

  SpMat jacobian(const P1Field& w) const;
  SpMat jacobian_fd(const P1Field& w) const;  // central differences, verification path

  // a_T(w; v) = sum over interior i of v_i a_T-row_i(w).
  double apply_form(const P1Field& w, const P1Field& v) const;

  // Element-localized parts of a_T(w; v); they sum to apply_form exactly.
  std::vector<double> local_form_parts(const P1Field& w, const P1Field& v) const;

  // Splitting of the box form into diffusion, convective and reactive parts
  // (finite-volume mode only; the three sum to apply_form).
  double form_diffusion(const P1Field& w, const P1Field& v) const;
  double form_convective(const P1Field& w, const P1Field& v) const;
  double form_reactive(const P1Field& w, const P1Field& v) const;

  P1Field make_field(double fill = 0.0) const { return P1Field(mesh(), fill); }
  P1Field from_unknowns(const Eigen::VectorXd& x) const;
  Eigen::VectorXd to_unknowns(const P1Field& w) const;

 private:
  // The diagram is held by reference (it carries the mesh identity); scheme
  // and coefficients are cheap value types and are copied in.
  const DualDiagram* diagram_;
  UpwindScheme scheme_;
  Coefficients coeffs_;
  SystemOptions options_;
  bool divfree_active_ = false;
  std::vector<int> unknowns_;
  std::vector<int> equation_of_;
};

// Galerkin linearization G(i, k) = a'(u; psi_k, psi_i) on the interior
// unknowns, shared by the conforming discretization and the dual solver.
SpMat galerkin_linearization(const Coefficients& coeffs, const DiscreteSystem& system,
                             const P1Field& u);

}  // namespace fvdwr
