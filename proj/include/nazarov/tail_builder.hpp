#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "nazarov/dyadic_geometry.hpp"

namespace nazarov {

/// Shell sequence of the tails: mu_p = floor(lambda^p), mu_0 = 1, and the
/// index offsets alpha_p / beta_p that place layer p around the seed.
///
/// Offsets are measured in layer-p cells from the lower-left corner of the
/// seed; layer p then occupies the index ring [beta_p, alpha_p + mu_p - 1]^2
/// minus [beta_p + mu_p, alpha_p - 1]^2.
class TailParameters {
 public:
  /// Deepest layer for which the integer offsets are guaranteed to fit.
  static constexpr int kMaxLayer = 36;

  explicit TailParameters(Rational lambda = Rational(5, 2)) : lambda_(lambda) {
    // 2 < lambda < 2^(3/2)  <=>  lambda > 2 and lambda^2 < 8.
    if (!(lambda > Rational(2)) || !(lambda * lambda < Rational(8)))
      throw std::invalid_argument("TailParameters: lambda must lie in (2, 2^(3/2)), got " +
                                  lambda.str());
    compute();
  }

  const Rational& lambda() const { return lambda_; }

  std::int64_t mu(int p) const { return at(mu_, p); }
  std::int64_t alpha(int p) const { return at(alpha_, p); }
  std::int64_t beta(int p) const { return at(beta_, p); }

  friend bool operator==(const TailParameters& a, const TailParameters& b) {
    return a.lambda_ == b.lambda_;
  }

 private:
  static std::int64_t at(const std::vector<std::int64_t>& v, int p) {
    if (p < 0 || p >= static_cast<int>(v.size()))
      throw std::out_of_range("TailParameters: layer index " + std::to_string(p) +
                              " outside [0, " + std::to_string(kMaxLayer) + "]");
    return v[static_cast<std::size_t>(p)];
  }

  void compute() {
    using boost::multiprecision::cpp_int;
    const cpp_int num = lambda_.num(), den = lambda_.den();
    cpp_int pn = 1, pd = 1;
    mu_.assign(1, 1);
    alpha_.assign(1, 0);
    beta_.assign(1, 0);
    // Running value of mu_1 2^(p-1) + ... + mu_(p-1) 2.
    cpp_int weighted = 0;
    for (int p = 1; p <= kMaxLayer; ++p) {
      pn *= num;
      pd *= den;
      cpp_int mu = pn / pd;  // floor, both positive
      cpp_int alpha, beta;
      if (p == 1) {
        alpha = 2;
        beta = -2;
      } else {
        weighted = 2 * weighted + 2 * cpp_int(mu_.back());
        alpha = (cpp_int(1) << p) + weighted;
        beta = -weighted - mu;
      }
      mu_.push_back(narrow(mu));
      alpha_.push_back(narrow(alpha));
      beta_.push_back(narrow(beta));
    }
  }

  static std::int64_t narrow(const boost::multiprecision::cpp_int& v) {
    // Keep head-room for the seed index * 2^p additions done by callers.
    static const boost::multiprecision::cpp_int lim = std::int64_t{1} << 61;
    if (v > lim || v < -lim) throw std::overflow_error("TailParameters: offset overflow");
    return static_cast<std::int64_t>(v);
  }

  Rational lambda_;
  std::vector<std::int64_t> mu_, alpha_, beta_;
};

struct LayerParameters {
  std::int64_t mu;
  std::int64_t alpha;
  std::int64_t beta;
  friend bool operator==(const LayerParameters&, const LayerParameters&) = default;
};

inline LayerParameters tail_parameters(int p, const Rational& lambda) {
  if (p < 1) throw std::invalid_argument("tail_parameters: p must be >= 1");
  TailParameters params(lambda);
  return {params.mu(p), params.alpha(p), params.beta(p)};
}

/// The closed sup-norm annulus around c_a that layer p tiles:
/// inner <= |x - c_a|_inf < outer.
struct Annulus {
  Rational inner;
  Rational outer;
};

inline Annulus annulus(const DyadicSquare& a, int p, const TailParameters& params) {
  if (p < 1) throw std::invalid_argument("annulus: p must be >= 1");
  const Rational l = a.side();
  Rational inner = l / Rational(2);
  for (int q = 1; q < p; ++q) inner += Rational(params.mu(q)) * Rational::pow2(-q) * l;
  Rational outer = inner + Rational(params.mu(p)) * Rational::pow2(-p) * l;
  return {inner, outer};
}

/// Index of `cell` within the tail of `seed`: layer p >= 0, or -1 when the
/// cell is not one of the tail's squares.
inline int tail_layer_of(const DyadicSquare& seed, const DyadicSquare& cell,
                         const TailParameters& params, int max_layer) {
  const int p = cell.depth - seed.depth;
  if (p < 0 || p > max_layer) return -1;
  if (p == 0) return cell == seed ? 0 : -1;
  const std::int64_t j = cell.col - (seed.col << p);
  const std::int64_t i = cell.row - (seed.row << p);
  const std::int64_t mu = params.mu(p), alpha = params.alpha(p), beta = params.beta(p);
  const std::int64_t lo = beta, hi = alpha + mu - 1;
  if (i < lo || i > hi || j < lo || j > hi) return -1;
  const std::int64_t ilo = beta + mu, ihi = alpha - 1;
  if (i >= ilo && i <= ihi && j >= ilo && j <= ihi) return -1;
  return p;
}

/// Layer p >= 1 of the tail, block by block (up, down, left, right and the
/// four corners) in the order they are listed in the construction.
inline std::vector<DyadicSquare> tail_layer(const DyadicSquare& a, int p,
                                            const TailParameters& params) {
  if (p < 1) throw std::invalid_argument("tail_layer: p must be >= 1");
  const std::int64_t mu = params.mu(p), al = params.alpha(p), be = params.beta(p);
  struct Block {
    std::int64_t i0, j0, i1, j1;
  };
  const Block blocks[8] = {
      {al, be + mu, al + mu - 1, al - 1},       // up
      {be, be + mu, be + mu - 1, al - 1},       // down
      {be + mu, be, al - 1, be + mu - 1},       // left
      {be + mu, al, al - 1, al + mu - 1},       // right
      {al, al, al + mu - 1, al + mu - 1},       // up-right
      {al, be, al + mu - 1, be + mu - 1},       // up-left
      {be, al, be + mu - 1, al + mu - 1},       // down-right
      {be, be, be + mu - 1, be + mu - 1},       // down-left
  };
  const int depth = a.depth + p;
  const std::int64_t m0 = a.col << p, n0 = a.row << p;
  std::vector<DyadicSquare> cells;
  std::int64_t side = al + mu - be;
  std::int64_t hole = al - be - mu;
  cells.reserve(static_cast<std::size_t>(side * side - hole * hole));
  for (const Block& b : blocks)
    for (std::int64_t i = b.i0; i <= b.i1; ++i)
      for (std::int64_t j = b.j0; j <= b.j1; ++j) cells.push_back({depth, m0 + j, n0 + i});
  return cells;
}

struct TailFamily {
  DyadicSquare seed;
  std::vector<std::vector<DyadicSquare>> layers;  // layers[0] == {seed}
  TailParameters params;

  std::size_t cell_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.size();
    return n;
  }
};

inline TailFamily tail(const DyadicSquare& a, int p_max, const TailParameters& params) {
  if (p_max < 0) throw std::invalid_argument("tail: P_max must be >= 0");
  TailFamily t{a, {{a}}, params};
  for (int p = 1; p <= p_max; ++p) t.layers.push_back(tail_layer(a, p, params));
  return t;
}

/// Side of the square (centered at c_a) tiled by layers 0..p.
inline Rational tail_outer_side(const DyadicSquare& a, int p, const TailParameters& params) {
  if (p == 0) return a.side();
  return Rational(2) * annulus(a, p, params).outer;
}

}  // namespace nazarov
