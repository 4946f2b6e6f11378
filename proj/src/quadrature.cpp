#include "fvdwr/quadrature.hpp"

#include <cmath>

#include "fvdwr/errors.hpp"

namespace fvdwr {

namespace {

TriangleRule make_degree2() {
  // Edge-midpoint rule, exact for quadratics.
  TriangleRule r;
  r.degree = 2;
  const double w = 1.0 / 3.0;
  r.nodes = {{{0.5, 0.5, 0.0}, w}, {{0.0, 0.5, 0.5}, w}, {{0.5, 0.0, 0.5}, w}};
  return r;
}

void push_sym3(TriangleRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  r.nodes.push_back({{b, a, a}, w});
  r.nodes.push_back({{a, b, a}, w});
  r.nodes.push_back({{a, a, b}, w});
}

TriangleRule make_degree5() {
  // Classical 7-point rule.
  TriangleRule r;
  r.degree = 5;
  const double s15 = std::sqrt(15.0);
  r.nodes.push_back({{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0});
  push_sym3(r, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
  push_sym3(r, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
  return r;
}

TriangleRule make_degree8() {
  // Collapsed 5x5 Gauss product rule: x = s, y = t (1 - s) with Jacobian
  // (1 - s). A polynomial of total degree 8 becomes degree <= 9 in s and
  // <= 8 in t, both integrated exactly by five Gauss points.
  TriangleRule r;
  r.degree = 8;
  const double nodes[5] = {0.5 - 0.9061798459386640 / 2.0, 0.5 - 0.5384693101056831 / 2.0, 0.5,
                           0.5 + 0.5384693101056831 / 2.0, 0.5 + 0.9061798459386640 / 2.0};
  const double weights[5] = {0.2369268850561891 / 2.0, 0.4786286704993665 / 2.0,
                             0.5688888888888889 / 2.0, 0.4786286704993665 / 2.0,
                             0.2369268850561891 / 2.0};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double s = nodes[i];
      const double t = nodes[j];
      const double x = s;
      const double y = t * (1.0 - s);
      // Weight normalized to the unit-area simplex (factor 2 for the jacobian
      // of the reference triangle of area 1/2).
      r.nodes.push_back({{1.0 - x - y, x, y}, 2.0 * weights[i] * weights[j] * (1.0 - s)});
    }
  }
  return r;
}

SegmentRule make_gauss3() {
  SegmentRule r;
  r.degree = 5;
  const double t = std::sqrt(3.0 / 5.0);
  r.nodes = {{0.5 * (1.0 - t), 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 * (1.0 + t), 5.0 / 18.0}};
  return r;
}

SegmentRule make_gauss5() {
  SegmentRule r;
  r.degree = 9;
  const double t1 = 0.9061798459386640;
  const double t2 = 0.5384693101056831;
  const double w1 = 0.2369268850561891 / 2.0;
  const double w2 = 0.4786286704993665 / 2.0;
  const double w0 = 0.5688888888888889 / 2.0;
  r.nodes = {{0.5 * (1.0 - t1), w1},
             {0.5 * (1.0 - t2), w2},
             {0.5, w0},
             {0.5 * (1.0 + t2), w2},
             {0.5 * (1.0 + t1), w1}};
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static const TriangleRule d2 = make_degree2();
  static const TriangleRule d5 = make_degree5();
  static const TriangleRule d8 = make_degree8();
  if (degree <= 2) return d2;
  if (degree <= 5) return d5;
  if (degree <= 8) return d8;
  throw ConfigError("no triangle quadrature rule of degree " + std::to_string(degree));
}

const SegmentRule& segment_rule(int degree) {
  static const SegmentRule g3 = make_gauss3();
  static const SegmentRule g5 = make_gauss5();
  if (degree <= 5) return g3;
  if (degree <= 9) return g5;
  throw ConfigError("no segment quadrature rule of degree " + std::to_string(degree));
}

std::vector<TriQuadPoint> map_to_triangle(const TriangleRule& rule, const Vec2& a, const Vec2& b,
                                          const Vec2& c) {
  const double area = std::abs(signed_area(a, b, c));
  std::vector<TriQuadPoint> pts;
  pts.reserve(rule.nodes.size());
  for (const auto& n : rule.nodes) {
    Vec2 x = a * n.bary[0] + b * n.bary[1] + c * n.bary[2];
    pts.push_back({x, n.weight * area});
  }
  return pts;
}

std::vector<SegQuadPoint> map_to_segment(const SegmentRule& rule, const Vec2& p0, const Vec2& p1) {
  const double len = dist(p0, p1);
  std::vector<SegQuadPoint> pts;
  pts.reserve(rule.nodes.size());
  for (const auto& n : rule.nodes) {
    pts.push_back({p0 + (p1 - p0) * n.t, n.weight * len});
  }
  return pts;
}

}  // namespace fvdwr
