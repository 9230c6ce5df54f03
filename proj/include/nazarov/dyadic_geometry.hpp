#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>

#include "nazarov/rational.hpp"

namespace nazarov {

struct RationalPoint {
  Rational x;
  Rational y;
  friend bool operator==(const RationalPoint&, const RationalPoint&) = default;
};

/// Axis-parallel square given by its center and edge length.  Distances are
/// computed on the closure, so the half-open/closed distinction never matters
/// for the metric operations here.
struct Square {
  RationalPoint center;
  Rational side{1};

  Rational half() const { return side / Rational(2); }
  Rational lo_x() const { return center.x - half(); }
  Rational hi_x() const { return center.x + half(); }
  Rational lo_y() const { return center.y - half(); }
  Rational hi_y() const { return center.y + half(); }

  friend bool operator==(const Square&, const Square&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Square& s) {
  return os << "Square{c=(" << s.center.x << "," << s.center.y << "), side=" << s.side << "}";
}

enum class Relation { equal, a_inside_b, b_inside_a, disjoint };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::equal: return "equal";
    case Relation::a_inside_b: return "a_inside_b";
    case Relation::b_inside_a: return "b_inside_a";
    case Relation::disjoint: return "disjoint";
  }
  return "?";
}

/// Half-open dyadic square [m 2^-k, (m+1) 2^-k) x [n 2^-k, (n+1) 2^-k).
/// The depth k may be negative (squares larger than the unit square).
struct DyadicSquare {
  int depth = 0;
  std::int64_t col = 0;
  std::int64_t row = 0;

  Rational side() const { return Rational::pow2(-depth); }
  Rational lo_x() const { return Rational(col) * side(); }
  Rational lo_y() const { return Rational(row) * side(); }
  RationalPoint center() const {
    Rational h = Rational::pow2(-depth - 1);
    return {Rational(2 * col + 1) * h, Rational(2 * row + 1) * h};
  }
  Square to_square() const { return {center(), side()}; }

  double side_d() const { return std::ldexp(1.0, -depth); }
  double center_x_d() const { return std::ldexp(static_cast<double>(2 * col + 1), -depth - 1); }
  double center_y_d() const { return std::ldexp(static_cast<double>(2 * row + 1), -depth - 1); }

  /// Ancestor at a shallower (or equal) depth.
  DyadicSquare ancestor(int d) const {
    if (d > depth) throw std::invalid_argument("ancestor: target depth is deeper");
    int s = depth - d;
    return {d, col >> s, row >> s};
  }
  DyadicSquare parent() const { return ancestor(depth - 1); }
  DyadicSquare child(int quadrant) const {
    return {depth + 1, 2 * col + (quadrant & 1), 2 * row + ((quadrant >> 1) & 1)};
  }

  /// True when *this is a (not necessarily strict) subset of `outer`.
  bool inside(const DyadicSquare& outer) const {
    return depth >= outer.depth && ancestor(outer.depth) == outer;
  }

  friend bool operator==(const DyadicSquare&, const DyadicSquare&) = default;
  friend auto operator<=>(const DyadicSquare&, const DyadicSquare&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const DyadicSquare& d) {
  return os << "(" << d.depth << "," << d.col << "," << d.row << ")";
}

struct DyadicSquareHash {
  std::size_t operator()(const DyadicSquare& d) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(d.depth) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(d.col) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(d.row) + 0x94D049BB133111EBull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

inline Relation relation(const DyadicSquare& a, const DyadicSquare& b) {
  if (a == b) return Relation::equal;
  if (a.inside(b)) return Relation::a_inside_b;
  if (b.inside(a)) return Relation::b_inside_a;
  return Relation::disjoint;
}

/// Same center, edge length scaled by `alpha`.
inline Square dilate(const Square& a, const Rational& alpha) {
  if (alpha <= Rational(0)) throw std::invalid_argument("dilate: factor must be positive");
  return {a.center, a.side * alpha};
}

namespace detail {

template <class T>
T point_to_interval(const T& x, const T& lo, const T& hi) {
  T zero{0};
  T d = lo - x;
  if (x - hi > d) d = x - hi;
  return d < zero ? zero : d;
}

/// Directed Hausdorff distance of [alo, ahi] into [blo, bhi]; the supremum of
/// a convex function over an interval sits at an endpoint.
template <class T>
T directed_interval(const T& alo, const T& ahi, const T& blo, const T& bhi) {
  T d1 = point_to_interval(alo, blo, bhi);
  T d2 = point_to_interval(ahi, blo, bhi);
  return d1 < d2 ? d2 : d1;
}

template <class T>
T gap_interval(const T& alo, const T& ahi, const T& blo, const T& bhi) {
  T zero{0};
  T g = blo - ahi;
  if (alo - bhi > g) g = alo - bhi;
  return g < zero ? zero : g;
}

}  // namespace detail

/// Hausdorff distance between the closed boxes under the sup-norm ground metric.
inline Rational hausdorff_linf(const Square& a, const Square& b) {
  using detail::directed_interval;
  Rational ab = max(directed_interval(a.lo_x(), a.hi_x(), b.lo_x(), b.hi_x()),
                    directed_interval(a.lo_y(), a.hi_y(), b.lo_y(), b.hi_y()));
  Rational ba = max(directed_interval(b.lo_x(), b.hi_x(), a.lo_x(), a.hi_x()),
                    directed_interval(b.lo_y(), b.hi_y(), a.lo_y(), a.hi_y()));
  return max(ab, ba);
}

/// inf over point pairs of the sup-norm distance (0 when the closures meet).
inline Rational gap_linf(const Square& a, const Square& b) {
  using detail::gap_interval;
  return max(gap_interval(a.lo_x(), a.hi_x(), b.lo_x(), b.hi_x()),
             gap_interval(a.lo_y(), a.hi_y(), b.lo_y(), b.hi_y()));
}

/// Positive-area intersection.
inline bool interiors_overlap(const Square& a, const Square& b) {
  return a.lo_x() < b.hi_x() && b.lo_x() < a.hi_x() && a.lo_y() < b.hi_y() &&
         b.lo_y() < a.hi_y();
}

/// Integer image of a dilated dyadic square on the grid of step 2^-(scale+3).
/// Used for bulk exact pairwise work where Rational would be needlessly slow.
/// The dilation factor is quarter / 4, so 1, 3/2, 2 and 3 are all exact.
struct GridBox {
  std::int64_t x0 = 0, x1 = 0, y0 = 0, y1 = 0;

  static GridBox of(const DyadicSquare& d, int quarter, int scale) {
    int shift = scale - d.depth;
    if (shift < 0 || shift > 56) throw std::overflow_error("GridBox: scale out of range");
    std::int64_t unit = std::int64_t{1} << shift;  // 2^(scale-k)
    std::int64_t cx = (2 * d.col + 1) * unit * 4;
    std::int64_t cy = (2 * d.row + 1) * unit * 4;
    std::int64_t h = quarter * unit;
    return {cx - h, cx + h, cy - h, cy + h};
  }

  std::int64_t side() const { return x1 - x0; }
};

inline std::int64_t hausdorff_linf(const GridBox& a, const GridBox& b) {
  using detail::directed_interval;
  std::int64_t ab = std::max(directed_interval(a.x0, a.x1, b.x0, b.x1),
                             directed_interval(a.y0, a.y1, b.y0, b.y1));
  std::int64_t ba = std::max(directed_interval(b.x0, b.x1, a.x0, a.x1),
                             directed_interval(b.y0, b.y1, a.y0, a.y1));
  return std::max(ab, ba);
}

inline std::int64_t gap_linf(const GridBox& a, const GridBox& b) {
  using detail::gap_interval;
  return std::max(gap_interval(a.x0, a.x1, b.x0, b.x1), gap_interval(a.y0, a.y1, b.y0, b.y1));
}

inline bool interiors_overlap(const GridBox& a, const GridBox& b) {
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

}  // namespace nazarov

template <>
struct std::hash<nazarov::DyadicSquare> : nazarov::DyadicSquareHash {};
