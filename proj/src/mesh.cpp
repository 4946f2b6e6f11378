#include "fvdwr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "fvdwr/errors.hpp"

namespace fvdwr {

namespace {

std::pair<int, int> ukey(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

// Reorder a triple so the longest edge is (v1, v2), keeping the orientation.
std::array<int, 3> longest_edge_first(const std::vector<Vec2>& verts, std::array<int, 3> t) {
  const double l0 = dist(verts[t[1]], verts[t[2]]);  // opposite v0
  const double l1 = dist(verts[t[2]], verts[t[0]]);  // opposite v1
  const double l2 = dist(verts[t[0]], verts[t[1]]);  // opposite v2
  if (l1 > l0 && l1 >= l2) return {t[1], t[2], t[0]};
  if (l2 > l0 && l2 > l1) return {t[2], t[0], t[1]};
  return t;
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> elements,
           std::vector<std::uint8_t> boundary_flags, int generation)
    : vertices_(std::move(vertices)), elements_(std::move(elements)), generation_(generation) {
  const int nv = num_vertices();
  for (auto& t : elements_) {
    for (int k : t) {
      if (k < 0 || k >= nv) throw ParseError("element vertex index out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw TopologyError("element with repeated vertex");
    double a = signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (a < 0) {
      std::swap(t[1], t[2]);
      a = -a;
    }
    const double h = triangle_diameter(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (!(a > 1e-14 * h * h)) throw TopologyError("degenerate (zero-area) element");
  }

  build_connectivity();

  // Boundary vertices are those on edges with a single incident element.
  std::vector<std::uint8_t> topological(nv, 0);
  for (const auto& [key, elems] : edge_table_) {
    if (elems[1] < 0) {
      topological[key.first] = 1;
      topological[key.second] = 1;
    }
  }
  if (!boundary_flags.empty()) {
    if (static_cast<int>(boundary_flags.size()) != nv)
      throw ParseError("boundary flag count mismatch");
    for (int i = 0; i < nv; ++i) {
      if ((boundary_flags[i] != 0) != (topological[i] != 0))
        throw ValidationError("boundary flag of vertex " + std::to_string(i) +
                              " contradicts the mesh topology");
    }
  }
  boundary_ = std::move(topological);
}

void Mesh::build_connectivity() {
  const int nv = num_vertices();
  star_offsets_cache_.assign(nv, {});
  neighbors_.assign(nv, {});

  std::map<std::pair<int, int>, std::array<int, 2>> edges;
  for (int e = 0; e < num_elements(); ++e) {
    const auto& t = elements_[e];
    for (int k = 0; k < 3; ++k) {
      star_offsets_cache_[t[k]].push_back(e);
      auto key = ukey(t[k], t[(k + 1) % 3]);
      auto it = edges.find(key);
      if (it == edges.end()) {
        edges.emplace(key, std::array<int, 2>{e, -1});
      } else {
        if (it->second[1] >= 0)
          throw TopologyError("edge (" + std::to_string(key.first) + "," +
                              std::to_string(key.second) + ") shared by more than two elements");
        it->second[1] = e;
      }
    }
  }
  edge_table_.assign(edges.begin(), edges.end());
  for (const auto& [key, elems] : edge_table_) {
    neighbors_[key.first].push_back(key.second);
    neighbors_[key.second].push_back(key.first);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

int Mesh::num_boundary_vertices() const {
  return static_cast<int>(std::count(boundary_.begin(), boundary_.end(), std::uint8_t{1}));
}

std::vector<int> Mesh::interior_vertices() const {
  std::vector<int> out;
  for (int i = 0; i < num_vertices(); ++i)
    if (!is_boundary_vertex(i)) out.push_back(i);
  return out;
}

double Mesh::element_area(int e) const {
  const auto& t = elements_[e];
  return signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

double Mesh::element_diameter(int e) const {
  const auto& t = elements_[e];
  return triangle_diameter(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

Vec2 Mesh::element_barycenter(int e) const {
  const auto& t = elements_[e];
  return barycenter(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

Vec2 Mesh::element_circumcenter(int e) const {
  const auto& t = elements_[e];
  return circumcenter(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int e = 0; e < num_elements(); ++e) a += element_area(e);
  return a;
}

double Mesh::max_diameter() const {
  double h = 0.0;
  for (int e = 0; e < num_elements(); ++e) h = std::max(h, element_diameter(e));
  return h;
}

std::array<int, 2> Mesh::edge_elements(int a, int b) const {
  auto key = ukey(a, b);
  auto it = std::lower_bound(edge_table_.begin(), edge_table_.end(), key,
                             [](const auto& entry, const auto& k) { return entry.first < k; });
  if (it == edge_table_.end() || it->first != key) return {-1, -1};
  return it->second;
}

bool Mesh::is_boundary_edge(int a, int b) const {
  auto elems = edge_elements(a, b);
  return elems[0] >= 0 && elems[1] < 0;
}

int Mesh::locate(const Vec2& p) const {
  for (int e = 0; e < num_elements(); ++e) {
    const auto& t = elements_[e];
    BarycentricMap bm(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    auto l = bm(p);
    if (l[0] >= -1e-12 && l[1] >= -1e-12 && l[2] >= -1e-12) return e;
  }
  return -1;
}

ElementGeometry element_geometry(const Mesh& mesh, int e) {
  const auto& t = mesh.element(e);
  const Vec2& a = mesh.vertex(t[0]);
  const Vec2& b = mesh.vertex(t[1]);
  const Vec2& c = mesh.vertex(t[2]);
  return {circumcenter(a, b, c), barycenter(a, b, c), BarycentricMap(a, b, c),
          triangle_diameter(a, b, c)};
}

Mesh load_mesh(std::istream& in) {
  std::string line;
  auto next_line = [&](const char* what) -> std::istringstream {
    while (std::getline(in, line)) {
      const auto pos = line.find('#');
      if (pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return std::istringstream(line);
    }
    throw ParseError(std::string("unexpected end of mesh stream while reading ") + what);
  };

  int nv = 0, ne = 0;
  {
    auto ls = next_line("header");
    if (!(ls >> nv >> ne) || nv < 3 || ne < 1) throw ParseError("malformed mesh header");
  }
  std::vector<Vec2> vertices(nv);
  std::vector<std::uint8_t> flags;
  bool any_flag = false;
  for (int i = 0; i < nv; ++i) {
    auto ls = next_line("vertex");
    double x, y;
    if (!(ls >> x >> y)) throw ParseError("malformed vertex line " + std::to_string(i));
    vertices[i] = {x, y};
    int flag;
    if (ls >> flag) {
      if (!any_flag) {
        flags.assign(nv, 0);
        any_flag = true;
      }
      flags[i] = flag != 0;
    } else if (any_flag) {
      throw ParseError("boundary flags must be given for all vertices or none");
    }
    double extra;
    if (ls >> extra) throw ParseError("only planar (2D) meshes are supported; vertex line " +
                                      std::to_string(i) + " has extra coordinates");
  }
  std::vector<std::array<int, 3>> elements(ne);
  for (int e = 0; e < ne; ++e) {
    auto ls = next_line("element");
    int i, j, k;
    if (!(ls >> i >> j >> k)) throw ParseError("malformed element line " + std::to_string(e));
    elements[e] = {i, j, k};
  }

  Mesh probe(vertices, elements, any_flag ? flags : std::vector<std::uint8_t>{});
  // Install refinement edges (longest edge) on the canonical orientation.
  std::vector<std::array<int, 3>> oriented;
  oriented.reserve(ne);
  for (int e = 0; e < ne; ++e) oriented.push_back(longest_edge_first(vertices, probe.element(e)));
  return Mesh(std::move(vertices), std::move(oriented));
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  return load_mesh(in);
}

void save_mesh(const Mesh& mesh, std::ostream& out) {
  out << mesh.num_vertices() << " " << mesh.num_elements() << "\n";
  out.precision(17);
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    out << mesh.vertex(i).x << " " << mesh.vertex(i).y << " "
        << (mesh.is_boundary_vertex(i) ? 1 : 0) << "\n";
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    out << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
}

Mesh friedrichs_keller(int n) {
  if (n < 1) throw ConfigError("Friedrichs-Keller grid needs n >= 1");
  const double h = 1.0 / n;
  std::vector<Vec2> verts((n + 1) * (n + 1));
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts[vid(i, j)] = {i * h, j * h};

  std::vector<std::array<int, 3>> elems;
  elems.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = vid(i, j), lr = vid(i + 1, j), ur = vid(i + 1, j + 1), ul = vid(i, j + 1);
      // Peak at the right angle, refinement edge on the diagonal.
      elems.push_back({lr, ur, ll});
      elems.push_back({ul, ll, ur});
    }
  }
  return Mesh(std::move(verts), std::move(elems));
}

MeshValidation validate_primary_mesh(const Mesh& mesh, DualKind kind) {
  MeshValidation report;
  report.min_inradius_ratio = 1.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    const Vec2& a = mesh.vertex(t[0]);
    const Vec2& b = mesh.vertex(t[1]);
    const Vec2& c = mesh.vertex(t[2]);
    report.min_inradius_ratio =
        std::min(report.min_inradius_ratio, triangle_inradius(a, b, c) / triangle_diameter(a, b, c));
    const Vec2 cc = circumcenter(a, b, c);
    auto l = BarycentricMap(a, b, c)(cc);
    const double tol = 1e-10;
    if (l[0] < -tol || l[1] < -tol || l[2] < -tol) {
      report.all_self_centered = false;
      report.not_self_centered.push_back(e);
    }
  }

  // Local empty-circumcircle test on interior edges (cocircular accepted).
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      auto elems = mesh.edge_elements(a, b);
      if (elems[1] < 0) continue;
      const int other = elems[0] == e ? elems[1] : elems[0];
      if (other < e) continue;  // visit each interior edge once
      const auto& s = mesh.element(other);
      int d = -1;
      for (int v : s)
        if (v != a && v != b) d = v;
      const Vec2 cc = mesh.element_circumcenter(e);
      const double r = dist(cc, mesh.vertex(t[0]));
      const double hh = mesh.element_diameter(e);
      if (dist(cc, mesh.vertex(d)) < r - 1e-10 * hh) {
        report.delaunay = false;
        report.non_delaunay_edges.push_back({std::min(a, b), std::max(a, b)});
      }
    }
  }
  (void)kind;  // full report computed in either case
  return report;
}

namespace {

// Working state for newest-vertex bisection with conforming closure.
struct Bisector {
  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;  // peak first, refinement edge (v1, v2)
  std::vector<bool> alive;
  std::map<std::pair<int, int>, int> midpoint_of;
  std::map<std::pair<int, int>, bool> edge_boundary;
  std::map<std::pair<int, int>, std::array<int, 2>> edge_elems;
  int depth_budget = 0;

  void link(int a, int b, int e) {
    auto [it, inserted] = edge_elems.try_emplace(ukey(a, b), std::array<int, 2>{-1, -1});
    auto& slots = it->second;
    if (slots[0] < 0 || !alive[slots[0]] || slots[0] == e)
      slots[0] = e;
    else if (slots[1] < 0 || !alive[slots[1]])
      slots[1] = e;
    else
      throw TopologyError("refinement produced a non-manifold edge");
  }

  int neighbor_across(int e, int a, int b) const {
    auto it = edge_elems.find(ukey(a, b));
    if (it == edge_elems.end()) return -1;
    for (int cand : it->second)
      if (cand >= 0 && cand != e && alive[cand]) return cand;
    return -1;
  }

  int midpoint(int a, int b) {
    auto key = ukey(a, b);
    auto it = midpoint_of.find(key);
    if (it != midpoint_of.end()) return it->second;
    const int m = static_cast<int>(verts.size());
    verts.push_back(fvdwr::midpoint(verts[a], verts[b]));
    midpoint_of.emplace(key, m);
    const bool on_boundary = edge_boundary.at(key);
    edge_boundary[ukey(a, m)] = on_boundary;
    edge_boundary[ukey(m, b)] = on_boundary;
    return m;
  }

  int add_tri(int peak, int a, int b) {
    tris.push_back({peak, a, b});
    alive.push_back(true);
    const int e = static_cast<int>(tris.size()) - 1;
    link(peak, a, e);
    link(a, b, e);
    link(b, peak, e);
    return e;
  }

  // Split one element across its refinement edge at an existing midpoint.
  void split(int e, int m) {
    const auto [p, a, b] = std::tuple(tris[e][0], tris[e][1], tris[e][2]);
    alive[e] = false;
    edge_boundary[ukey(m, p)] = false;
    add_tri(m, p, a);
    add_tri(m, b, p);
  }

  void bisect(int e) {
    if (--depth_budget < 0) throw TopologyError("refinement cascade did not terminate");
    if (!alive[e]) return;
    const int a = tris[e][1], b = tris[e][2];
    int n = neighbor_across(e, a, b);
    if (n >= 0 && ukey(tris[n][1], tris[n][2]) != ukey(a, b)) {
      bisect(n);  // make the neighbour compatible first
      n = neighbor_across(e, a, b);
    }
    const int m = midpoint(a, b);
    split(e, m);
    if (n >= 0) split(n, m);
  }
};

}  // namespace

Mesh refine_mesh(const Mesh& mesh, const std::vector<int>& marked) {
  return refine_mesh(mesh, marked, nullptr);
}

Mesh refine_mesh(const Mesh& mesh, const std::vector<int>& marked,
                 std::vector<std::array<int, 2>>* vertex_parents) {
  if (vertex_parents) {
    vertex_parents->resize(mesh.num_vertices());
    for (int i = 0; i < mesh.num_vertices(); ++i) (*vertex_parents)[i] = {i, i};
  }
  if (marked.empty()) return mesh;
  for (int e : marked)
    if (e < 0 || e >= mesh.num_elements())
      throw ValidationError("marked element index out of range: " + std::to_string(e));

  Bisector w;
  w.verts = mesh.vertices();
  w.tris = mesh.elements();
  w.alive.assign(w.tris.size(), true);
  w.depth_budget = 8 * mesh.num_elements() + 64;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.element(e);
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      w.edge_elems[ukey(a, b)] = mesh.edge_elements(a, b);
      w.edge_boundary[ukey(a, b)] = mesh.is_boundary_edge(a, b);
    }
  }

  std::vector<int> order(marked);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (int e : order)
    if (w.alive[e]) w.bisect(e);

  if (vertex_parents) {
    vertex_parents->resize(w.verts.size(), {-1, -1});
    for (const auto& [edge, m] : w.midpoint_of) (*vertex_parents)[m] = {edge.first, edge.second};
  }
  std::vector<std::array<int, 3>> out;
  out.reserve(w.tris.size());
  for (std::size_t e = 0; e < w.tris.size(); ++e)
    if (w.alive[e]) out.push_back(w.tris[e]);
  return Mesh(std::move(w.verts), std::move(out), {}, mesh.generation() + 1);
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<int> all(mesh.num_elements());
  std::iota(all.begin(), all.end(), 0);
  return refine_mesh(mesh, all);
}

}  // namespace fvdwr
