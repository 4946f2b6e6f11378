#include "fvdwr/dual.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fvdwr/errors.hpp"

namespace fvdwr {

double DualDiagram::total_measure() const {
  double s = 0.0;
  for (double m : m_i_) s += m;
  return s;
}

int DualDiagram::edge_index(int a, int b) const {
  const int lo = std::min(a, b), hi = std::max(a, b);
  for (int idx : vertex_edges_[lo]) {
    const Edge& e = edges_[idx];
    if (e.a == lo && e.b == hi) return idx;
  }
  return -1;
}

std::vector<int> DualDiagram::edge_segments(int edge_idx) const {
  std::vector<int> out;
  for (int e : edges_[edge_idx].elements) {
    if (e < 0) continue;
    for (int s : elem_segments_[e])
      if (segments_[s].edge == edge_idx) out.push_back(s);
  }
  return out;
}

double DualDiagram::m_i_T(int vertex, int element) const {
  double a = 0.0;
  for (int f : elem_fragments_[element])
    if (fragments_[f].vertex == vertex) a += fragments_[f].area;
  return a;
}

DualDiagram build_dual_diagram(const Mesh& mesh, DualKind kind) {
  if (kind == DualKind::voronoi) {
    auto report = validate_primary_mesh(mesh, DualKind::voronoi);
    if (!report.all_self_centered) throw NotSelfCenteredError(report.not_self_centered.front());
  }

  DualDiagram d;
  d.kind_ = kind;
  d.mesh_ = &mesh;
  const int nv = mesh.num_vertices();
  const int ne = mesh.num_elements();
  d.m_i_.assign(nv, 0.0);
  d.elem_segments_.assign(ne, {-1, -1, -1});
  d.elem_fragments_.assign(ne, {-1, -1, -1, -1, -1, -1});
  d.lambda_.assign(nv, {});
  d.vertex_edges_.assign(nv, {});

  std::map<std::pair<int, int>, int> edge_ids;
  auto edge_id = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto it = edge_ids.find(key);
    if (it != edge_ids.end()) return it->second;
    const int idx = static_cast<int>(d.edges_.size());
    DualDiagram::Edge e;
    e.a = key.first;
    e.b = key.second;
    e.m = 0.0;
    e.d = dist(mesh.vertex(e.a), mesh.vertex(e.b));
    e.nu = (mesh.vertex(e.b) - mesh.vertex(e.a)) / e.d;
    e.elements = mesh.edge_elements(e.a, e.b);
    d.edges_.push_back(e);
    edge_ids.emplace(key, idx);
    d.vertex_edges_[e.a].push_back(idx);
    d.vertex_edges_[e.b].push_back(idx);
    return idx;
  };

  for (int e = 0; e < ne; ++e) {
    const auto& t = mesh.element(e);
    const Vec2 center =
        kind == DualKind::voronoi ? mesh.element_circumcenter(e) : mesh.element_barycenter(e);

    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      const int idx = edge_id(a, b);
      DualDiagram::Edge& edge = d.edges_[idx];

      DualDiagram::Segment seg;
      seg.edge = idx;
      seg.element = e;
      seg.p0 = midpoint(mesh.vertex(a), mesh.vertex(b));
      seg.p1 = center;
      seg.length = dist(seg.p0, seg.p1);
      if (seg.length <= 1e-13 * edge.d) seg.length = 0.0;  // degenerate interface
      // Unit normal pointing from the box of edge.a into the box of edge.b.
      if (seg.length > 0.0) {
        Vec2 n = perp(seg.p1 - seg.p0) / dist(seg.p0, seg.p1);
        if (dot(n, edge.nu) < 0.0) n = n * -1.0;
        seg.normal = n;
      } else {
        seg.normal = edge.nu;
      }
      edge.m += seg.length;
      d.elem_segments_[e][k] = static_cast<int>(d.segments_.size());
      d.segments_.push_back(seg);

      // Two fragments per element edge: one for each endpoint.
      for (int which = 0; which < 2; ++which) {
        const int v = which == 0 ? a : b;
        const int o = which == 0 ? b : a;
        DualDiagram::Fragment frag;
        frag.vertex = v;
        frag.other = o;
        frag.edge = idx;
        frag.element = e;
        frag.tri = {mesh.vertex(v), seg.p0, center};
        frag.area = std::abs(signed_area(frag.tri[0], frag.tri[1], frag.tri[2]));
        d.m_i_[v] += frag.area;
        d.elem_fragments_[e][2 * k + which] = static_cast<int>(d.fragments_.size());
        d.fragments_.push_back(frag);
      }
    }
  }

  for (int idx = 0; idx < d.num_edges(); ++idx) {
    const DualDiagram::Edge& e = d.edges_[idx];
    if (e.m != 0.0) {
      d.lambda_[e.a].push_back(e.b);
      d.lambda_[e.b].push_back(e.a);
    }
  }
  for (auto& nb : d.lambda_) std::sort(nb.begin(), nb.end());
  for (auto& ve : d.vertex_edges_) std::sort(ve.begin(), ve.end());
  return d;
}

}  // namespace fvdwr
