#pragma once

#include <array>
#include <vector>

#include "fvdwr/geometry.hpp"
#include "fvdwr/mesh.hpp"

namespace fvdwr {

// Secondary (control-volume) partition dual to the primary triangulation.
//
// Per element, each edge (a, b) contributes one interface segment from the
// edge midpoint to the element center (circumcenter for Voronoi, barycenter
// for Donald), and each ordered pair (vertex, other vertex) contributes one
// triangular fragment (vertex, edge midpoint, center). The six fragments tile
// the element, and the two fragments of a vertex within an element tile the
// intersection of its control volume with the element.
class DualDiagram {
 public:
  struct Edge {
    int a, b;        // a < b
    double m;        // interface measure, summed over elements
    double d;        // |x_a - x_b|
    Vec2 nu;         // unit vector from x_a toward x_b
    std::array<int, 2> elements;  // incident elements, -1 when absent
  };

  struct Segment {
    int edge;     // index into edges()
    int element;
    Vec2 p0, p1;  // from edge midpoint to element center
    double length;
    Vec2 normal;  // unit normal pointing from the a-side box into the b-side box
  };

  struct Fragment {
    int vertex;  // control volume owner
    int other;   // opposite edge endpoint
    int edge;
    int element;
    std::array<Vec2, 3> tri;  // (x_vertex, edge midpoint, center)
    double area;
  };

  DualKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }

  double m_i(int vertex) const { return m_i_[vertex]; }
  const std::vector<double>& box_measures() const { return m_i_; }
  double total_measure() const;

  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int idx) const { return edges_[idx]; }
  const std::vector<Edge>& edges() const { return edges_; }
  int edge_index(int a, int b) const;  // -1 when (a, b) is not a mesh edge

  // Segments of one dual edge (one or two, in element order).
  std::vector<int> edge_segments(int edge_idx) const;
  const Segment& segment(int idx) const { return segments_[idx]; }
  int num_segments() const { return static_cast<int>(segments_.size()); }

  // The three interface segments of an element, indexed by local edge
  // (vertices k, k+1 of the element triple).
  const std::array<int, 3>& element_segments(int e) const { return elem_segments_[e]; }

  // The six fragments of an element.
  const std::array<int, 6>& element_fragments(int e) const { return elem_fragments_[e]; }
  const Fragment& fragment(int idx) const { return fragments_[idx]; }
  int num_fragments() const { return static_cast<int>(fragments_.size()); }

  // meas(control volume of vertex ∩ element), zero when the vertex is not in
  // the element.
  double m_i_T(int vertex, int element) const;

  // Neighbours with nonzero interface measure.
  const std::vector<int>& lambda_i(int vertex) const { return lambda_[vertex]; }

  // Dual edges incident to a vertex (all mesh edges, including m = 0 ones).
  const std::vector<int>& vertex_edges(int vertex) const { return vertex_edges_[vertex]; }

  friend DualDiagram build_dual_diagram(const Mesh& mesh, DualKind kind);

 private:
  DualKind kind_ = DualKind::voronoi;
  const Mesh* mesh_ = nullptr;
  std::vector<double> m_i_;
  std::vector<Edge> edges_;
  std::vector<Segment> segments_;
  std::vector<Fragment> fragments_;
  std::vector<std::array<int, 3>> elem_segments_;
  std::vector<std::array<int, 6>> elem_fragments_;
  std::vector<std::vector<int>> lambda_;
  std::vector<std::vector<int>> vertex_edges_;
};

// Throws NotSelfCenteredError when a Voronoi diagram is requested on a mesh
// with an element whose circumcenter lies outside its closure. Zero-length
// interfaces are recorded with measure zero, not treated as errors.
DualDiagram build_dual_diagram(const Mesh& mesh, DualKind kind);

}  // namespace fvdwr
