#pragma once

#include <algorithm>
#include <cmath>

#include "nazarov/dyadic_geometry.hpp"

namespace nazarov {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double norm_inf(Point p) { return std::max(std::abs(p.x), std::abs(p.y)); }

/// Closed axis-parallel rectangle in floating point.
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  static Rect of(const Square& s) {
    return {s.lo_x().to_double(), s.lo_y().to_double(), s.hi_x().to_double(),
            s.hi_y().to_double()};
  }
  static Rect centered(Point c, double side) {
    return {c.x - side / 2, c.y - side / 2, c.x + side / 2, c.y + side / 2};
  }

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  Point center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
  bool contains(Point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  friend bool operator==(const Rect&, const Rect&) = default;
};

}  // namespace nazarov
