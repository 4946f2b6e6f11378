#pragma once

#include <array>
#include <vector>

#include "fvdwr/geometry.hpp"

namespace fvdwr {

// Symmetric quadrature rule on the reference triangle, nodes in barycentric
// coordinates, weights normalized to sum to one (multiply by the area).
struct TriangleRule {
  struct Node {
    std::array<double, 3> bary;
    double weight;
  };
  std::vector<Node> nodes;
  int degree = 0;
};

// Rules by polynomial exactness degree: 2 (3-point), 5 (7-point), 8 (16-point).
const TriangleRule& triangle_rule(int degree);

// Gauss-Legendre rule on [0,1], weights summing to one.
struct SegmentRule {
  struct Node {
    double t;
    double weight;
  };
  std::vector<Node> nodes;
  int degree = 0;
};

// Degrees: 5 (3-point), 9 (5-point).
const SegmentRule& segment_rule(int degree);

// Quadrature point on a physical triangle.
struct TriQuadPoint {
  Vec2 x;
  double w;  // weight including the triangle area
};

std::vector<TriQuadPoint> map_to_triangle(const TriangleRule& rule, const Vec2& a, const Vec2& b,
                                          const Vec2& c);

struct SegQuadPoint {
  Vec2 x;
  double w;  // weight including the segment length
};

std::vector<SegQuadPoint> map_to_segment(const SegmentRule& rule, const Vec2& p0, const Vec2& p1);

}  // namespace fvdwr
