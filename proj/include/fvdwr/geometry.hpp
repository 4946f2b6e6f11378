#pragma once

#include <array>
#include <cmath>

namespace fvdwr {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }

// Rotate by +90 degrees.
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

// Signed area of the triangle (a, b, c); positive for counterclockwise order.
inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

inline Vec2 midpoint(const Vec2& a, const Vec2& b) { return {(a.x + b.x) / 2, (a.y + b.y) / 2}; }

inline Vec2 barycenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  return {(a.x + b.x + c.x) / 3, (a.y + b.y + c.y) / 3};
}

inline Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 d1 = b - a;
  const Vec2 d2 = c - a;
  const double l1 = dot(d1, d1);
  const double l2 = dot(d2, d2);
  const double denom = 2.0 * cross(d1, d2);
  return {a.x + (d2.y * l1 - d1.y * l2) / denom, a.y + (d1.x * l2 - d2.x * l1) / denom};
}

inline double triangle_diameter(const Vec2& a, const Vec2& b, const Vec2& c) {
  return std::max({dist(a, b), dist(b, c), dist(c, a)});
}

inline double triangle_inradius(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double s = 0.5 * (dist(a, b) + dist(b, c) + dist(c, a));
  return std::abs(signed_area(a, b, c)) / s;
}

// Barycentric coordinates with respect to a triangle; lambda[k] is 1 at vertex k.
struct BarycentricMap {
  Vec2 v0, v1, v2;
  double inv_det = 0.0;

  BarycentricMap(const Vec2& a, const Vec2& b, const Vec2& c) : v0(a), v1(b), v2(c) {
    inv_det = 1.0 / cross(v1 - v0, v2 - v0);
  }

  std::array<double, 3> operator()(const Vec2& p) const {
    const double l1 = cross(p - v0, v2 - v0) * inv_det;
    const double l2 = cross(v1 - v0, p - v0) * inv_det;
    return {1.0 - l1 - l2, l1, l2};
  }
};

// 2x2 symmetric matrix, used for tensor-valued diffusion coefficients.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 1.0}; }
  static Mat2 scalar(double s) { return {s, 0.0, s}; }

  Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
  Mat2 operator-(const Mat2& o) const { return {a11 - o.a11, a12 - o.a12, a22 - o.a22}; }
  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a22 * s}; }
};

}  // namespace fvdwr
