#pragma once

#include <cmath>

namespace emac {

/// Plain 2D vector used for coordinates and velocity values.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// 2x2 matrix, row-major; for velocity gradients g(a, b) = d u_a / d x_b.
struct Mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

  constexpr double trace() const { return xx + yy; }
  constexpr Mat2 transposed() const { return {xx, yx, xy, yy}; }
  constexpr Vec2 operator*(const Vec2& v) const { return {xx * v.x + xy * v.y, yx * v.x + yy * v.y}; }
  friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.xx + b.xx, a.xy + b.xy, a.yx + b.yx, a.yy + b.yy};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& a) { return {s * a.xx, s * a.xy, s * a.yx, s * a.yy}; }
};

/// Axis-aligned rectangle.
struct Rect {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;

  constexpr double width() const { return xmax - xmin; }
  constexpr double height() const { return ymax - ymin; }
  constexpr double area() const { return width() * height(); }
};

}  // namespace emac
