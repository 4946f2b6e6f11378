#pragma once

#include <functional>
#include <vector>

#include "fvdwr/dual.hpp"
#include "fvdwr/geometry.hpp"
#include "fvdwr/mesh.hpp"

namespace fvdwr {

// Continuous piecewise-linear nodal field on a mesh.
class P1Field {
 public:
  P1Field() = default;
  explicit P1Field(const Mesh& mesh, double fill = 0.0)
      : mesh_(&mesh), values_(mesh.num_vertices(), fill) {}
  P1Field(const Mesh& mesh, std::vector<double> values)
      : mesh_(&mesh), values_(std::move(values)) {}

  const Mesh& mesh() const { return *mesh_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }
  double& operator[](int i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double eval(int element, const Vec2& p) const;
  Vec2 gradient(int element) const;

  void zero_boundary();

 private:
  const Mesh* mesh_ = nullptr;
  std::vector<double> values_;
};

P1Field interpolate(const Mesh& mesh, const std::function<double(Vec2)>& f);

// Exact norms of the P1 interpolant.
double l2_norm(const P1Field& v, int quad_degree = 5);
double h1_seminorm(const P1Field& v);

// Lumped L2 norm: sqrt(sum_i v_i^2 m_i) over all vertices.
double lumped_norm(const P1Field& v, const DualDiagram& diagram);

// Discrete Dirichlet-form seminorm over the dual edges,
// |v|^2 = 1/2 sum_i sum_j (v_i - v_j)^2 m_ij / d_ij.
double discrete_v_seminorm(const P1Field& v, const DualDiagram& diagram);

// Xi-norm used by the convergence study: the discrete seminorm for Voronoi
// diagrams, the H1 seminorm for Donald diagrams, plus the lumped L2 part.
double xi_norm(const P1Field& v, const DualDiagram& diagram);

}  // namespace fvdwr
