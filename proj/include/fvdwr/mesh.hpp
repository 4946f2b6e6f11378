#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fvdwr/geometry.hpp"

namespace fvdwr {

// Conforming simplicial triangulation with vertex unknowns.
//
// Element vertex triples are stored counterclockwise with the refinement edge
// (for newest-vertex bisection) spanned by the second and third vertex; the
// first vertex is the peak.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements,
       std::vector<std::uint8_t> boundary_flags = {}, int generation = 0);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int generation() const { return generation_; }

  const Vec2& vertex(int i) const { return vertices_[i]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::array<int, 3>& element(int e) const { return elements_[e]; }
  const std::vector<std::array<int, 3>>& elements() const { return elements_; }

  bool is_boundary_vertex(int i) const { return boundary_[i] != 0; }
  int num_boundary_vertices() const;
  int num_interior_vertices() const { return num_vertices() - num_boundary_vertices(); }
  std::vector<int> interior_vertices() const;

  double element_area(int e) const;
  double element_diameter(int e) const;
  Vec2 element_barycenter(int e) const;
  Vec2 element_circumcenter(int e) const;
  double total_area() const;
  double max_diameter() const;

  // Elements incident to a vertex, ascending element index.
  const std::vector<int>& vertex_star(int i) const { return star_offsets_cache_[i]; }

  // Mesh-edge neighbours of a vertex, ascending vertex index.
  const std::vector<int>& vertex_neighbors(int i) const { return neighbors_[i]; }

  // Elements incident to the undirected edge (a, b); -1 entries when absent.
  std::array<int, 2> edge_elements(int a, int b) const;

  bool is_boundary_edge(int a, int b) const;

  // Locate the element containing p (tolerant barycentric test). Returns -1 on miss.
  int locate(const Vec2& p) const;

 private:
  void build_connectivity();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<std::uint8_t> boundary_;
  int generation_ = 0;

  std::vector<std::vector<int>> star_offsets_cache_;
  std::vector<std::vector<int>> neighbors_;
  // Undirected edges, key (min,max) -> up to two incident elements.
  std::vector<std::pair<std::pair<int, int>, std::array<int, 2>>> edge_table_;
};

struct ElementGeometry {
  Vec2 circumcenter;
  Vec2 barycenter;
  BarycentricMap barycentric_map;
  double diameter;
};

ElementGeometry element_geometry(const Mesh& mesh, int e);

// Node/element text format: header "nv ne", nv lines "x y [flag]", ne lines "i j k".
Mesh load_mesh(std::istream& in);
Mesh load_mesh_file(const std::string& path);
void save_mesh(const Mesh& mesh, std::ostream& out);

// Friedrichs-Keller triangulation of the unit square with n x n cells,
// all diagonals parallel; every element is a self-centered right triangle.
Mesh friedrichs_keller(int n);

enum class DualKind { voronoi, donald };

struct MeshValidation {
  bool all_self_centered = true;
  std::vector<int> not_self_centered;  // offending element indices
  bool delaunay = true;
  std::vector<std::array<int, 2>> non_delaunay_edges;
  double min_inradius_ratio = 0.0;  // min over elements of inradius / diameter

  bool admissible_for(DualKind kind) const {
    return kind == DualKind::donald || (all_self_centered && delaunay);
  }
};

// Report-only geometric validation; callers decide on the consequences.
MeshValidation validate_primary_mesh(const Mesh& mesh, DualKind kind);

// Conforming newest-vertex bisection. Every marked element is bisected at
// least once; parent vertices keep their indices and new vertices are
// appended. An empty marking returns the mesh unchanged.
Mesh refine_mesh(const Mesh& mesh, const std::vector<int>& marked);

// As above; additionally reports, per vertex of the refined mesh, the parent
// edge endpoints whose midpoint it is (a vertex is its own parent pair when it
// was inherited). Parents always carry smaller indices, so nodal fields can be
// prolongated in one ascending sweep.
Mesh refine_mesh(const Mesh& mesh, const std::vector<int>& marked,
                 std::vector<std::array<int, 2>>* vertex_parents);

Mesh refine_uniform(const Mesh& mesh);

}  // namespace fvdwr
