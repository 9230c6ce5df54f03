#include <gtest/gtest.h>

#include <set>
#include <unordered_set>

#include "nazarov/tail_builder.hpp"

using namespace nazarov;

namespace {

const TailParameters kParams{Rational(5, 2)};

std::set<DyadicSquare> as_set(const TailFamily& t) {
  std::set<DyadicSquare> s;
  for (const auto& l : t.layers) s.insert(l.begin(), l.end());
  return s;
}

}  // namespace

TEST(TailParameters, Examples) {
  EXPECT_EQ(tail_parameters(1, Rational(5, 2)), (LayerParameters{2, 2, -2}));
  EXPECT_EQ(tail_parameters(2, Rational(5, 2)), (LayerParameters{6, 8, -10}));
  EXPECT_EQ(tail_parameters(3, Rational(5, 2)), (LayerParameters{15, 28, -35}));
  EXPECT_THROW(tail_parameters(0, Rational(5, 2)), std::invalid_argument);
}

TEST(TailParameters, RejectsLambdaOutsideRange) {
  EXPECT_THROW(TailParameters(Rational(2)), std::invalid_argument);
  EXPECT_THROW(TailParameters(Rational(3)), std::invalid_argument);
  EXPECT_THROW(TailParameters(Rational(283, 100)), std::invalid_argument);  // 2.83^2 > 8
  EXPECT_NO_THROW(TailParameters(Rational(282, 100)));
}

// Recurrence oracle in plain integers, independent of the class.
TEST(TailParameters, MatchesRecurrenceAndOuterSideIdentity) {
  for (const Rational lambda : {Rational(21, 10), Rational(5, 2), Rational(14, 5)}) {
    const TailParameters P(lambda);
    __int128 pn = 1, pd = 1;
    std::vector<std::int64_t> mu{1};
    for (int p = 1; p <= 20; ++p) {
      pn *= lambda.num();
      pd *= lambda.den();
      mu.push_back(static_cast<std::int64_t>(pn / pd));
      ASSERT_EQ(P.mu(p), mu[static_cast<std::size_t>(p)]);
      std::int64_t alpha = std::int64_t{1} << p;
      for (int q = 1; q < p; ++q) alpha += mu[static_cast<std::size_t>(q)] << (p - q);
      if (p == 1) alpha = 2;
      ASSERT_EQ(P.alpha(p), alpha);
      // alpha + mu - beta = 2^p (1 + 2 sum_{q<=p} mu_q 2^-q)
      std::int64_t rhs = std::int64_t{1} << p;
      for (int q = 1; q <= p; ++q) rhs += 2 * (mu[static_cast<std::size_t>(q)] << (p - q));
      ASSERT_EQ(P.alpha(p) + P.mu(p) - P.beta(p), rhs) << "p=" << p;
    }
  }
}

TEST(Annulus, Examples) {
  const DyadicSquare a{0, 0, 0};
  EXPECT_EQ(annulus(a, 1, kParams).inner, Rational(1, 2));
  EXPECT_EQ(annulus(a, 1, kParams).outer, Rational(3, 2));
  EXPECT_EQ(annulus(a, 2, kParams).inner, Rational(3, 2));
  EXPECT_EQ(annulus(a, 2, kParams).outer, Rational(3));
  EXPECT_EQ(annulus(a, 3, kParams).outer, Rational(39, 8));
  const DyadicSquare b{2, 1, 3};
  EXPECT_EQ(annulus(b, 3, kParams).outer, Rational(39, 32));
}

TEST(TailLayer, Counts) {
  const DyadicSquare a{3, 2, 5};
  EXPECT_EQ(tail_layer(a, 1, kParams).size(), 32u);
  EXPECT_EQ(tail_layer(a, 2, kParams).size(), 432u);
  EXPECT_EQ(tail(a, 0, kParams).cell_count(), 1u);
  EXPECT_EQ(tail(a, 2, kParams).cell_count(), 465u);
  EXPECT_EQ(tail(a, 2, kParams).layers[0], std::vector<DyadicSquare>{a});
}

TEST(TailLayer, CellsLieInTheirAnnulus) {
  for (const DyadicSquare a : {DyadicSquare{0, 0, 0}, DyadicSquare{3, -2, 7}}) {
    for (int p = 1; p <= 4; ++p) {
      const Annulus ann = annulus(a, p, kParams);
      const RationalPoint c = a.center();
      for (const auto& cell : tail_layer(a, p, kParams)) {
        ASSERT_EQ(cell.depth, a.depth + p);
        const Square s = cell.to_square();
        for (const Rational& x : {s.lo_x(), s.hi_x()})
          for (const Rational& y : {s.lo_y(), s.hi_y()}) {
            const Rational d = max(abs(x - c.x), abs(y - c.y));
            EXPECT_GE(d, ann.inner);
            EXPECT_LE(d, ann.outer);
          }
      }
    }
  }
}

// Coverage oracle: every fine cell of the outer square at depth seed + P has
// exactly one ancestor among the tail cells, and the areas add up exactly.
TEST(Tail, TilesOuterSquareExactly) {
  for (int depth = -2; depth <= 4; ++depth) {
    const DyadicSquare a{depth, depth > 0 ? 1 : -1, 0};
    for (int P = 0; P <= 4; ++P) {
      const TailFamily t = tail(a, P, kParams);
      const std::set<DyadicSquare> cells = as_set(t);
      ASSERT_EQ(cells.size(), t.cell_count()) << "duplicate cells";
      Rational area(0);
      for (const auto& c : cells) area += c.side() * c.side();
      const Rational side = tail_outer_side(a, P, kParams);
      Rational expect = Rational(1);
      for (int q = 1; q <= P; ++q) expect += Rational(2 * kParams.mu(q)) * Rational::pow2(-q);
      ASSERT_EQ(side, expect * a.side());
      EXPECT_EQ(area, side * side) << "depth " << depth << " P " << P;
      if (P == 0) continue;
      const std::int64_t lo = kParams.beta(P), hi = kParams.alpha(P) + kParams.mu(P) - 1;
      const int fine = a.depth + P;
      for (std::int64_t i = lo; i <= hi; ++i)
        for (std::int64_t j = lo; j <= hi; ++j) {
          const DyadicSquare f{fine, (a.col << P) + j, (a.row << P) + i};
          int owners = 0;
          for (int d = a.depth; d <= fine; ++d) owners += cells.count(f.ancestor(d)) ? 1 : 0;
          ASSERT_EQ(owners, 1) << f;
        }
    }
  }
}

TEST(Tail, PairwiseDisjointAndLayerDepths) {
  const DyadicSquare a{1, 1, 0};
  const TailFamily t = tail(a, 3, kParams);
  std::vector<DyadicSquare> all;
  for (std::size_t p = 0; p < t.layers.size(); ++p)
    for (const auto& c : t.layers[p]) {
      EXPECT_EQ(c.depth, a.depth + static_cast<int>(p));
      all.push_back(c);
    }
  // Distinct cells of a tiling are disjoint iff no cell has an ancestor in the set.
  const std::set<DyadicSquare> s(all.begin(), all.end());
  for (const auto& c : all)
    for (int d = a.depth; d < c.depth; ++d) EXPECT_EQ(s.count(c.ancestor(d)), 0u);
}

TEST(Tail, LayerOfInvertsLayer) {
  const DyadicSquare a{2, 3, 1};
  const TailFamily t = tail(a, 3, kParams);
  for (std::size_t p = 0; p < t.layers.size(); ++p)
    for (const auto& c : t.layers[p]) EXPECT_EQ(tail_layer_of(a, c, kParams, 3), static_cast<int>(p));
  EXPECT_EQ(tail_layer_of(a, a.child(0), kParams, 3), -1);
  EXPECT_EQ(tail_layer_of(a, a.parent(), kParams, 3), -1);
  EXPECT_EQ(tail_layer_of(a, t.layers[3][0], kParams, 2), -1);
}

TEST(Tail, TranslationAndScaleEquivariance) {
  const DyadicSquare a{2, 1, 2};
  const TailFamily t = tail(a, 3, kParams);
  const DyadicSquare shifted{2, 1 + 5, 2 - 3};
  const TailFamily ts = tail(shifted, 3, kParams);
  const DyadicSquare halved{3, 1, 2};  // a scaled by 1/2 about the origin
  const TailFamily th = tail(halved, 3, kParams);
  for (std::size_t p = 0; p < t.layers.size(); ++p)
    for (std::size_t i = 0; i < t.layers[p].size(); ++i) {
      const DyadicSquare& c = t.layers[p][i];
      EXPECT_EQ(ts.layers[p][i], (DyadicSquare{c.depth, c.col + (std::int64_t{5} << p), c.row - (std::int64_t{3} << p)}));
      EXPECT_EQ(th.layers[p][i], (DyadicSquare{c.depth + 1, c.col, c.row}));
    }
}

// #t_p = 4 mu_p (alpha_p - beta_p) and alpha_p - beta_p + mu_p <= 2 lambda / (lambda - 2) mu_p
// up to the floors, so #t_p / mu_p^2 stays below 8 lambda / (lambda - 2).
TEST(Tail, LayerCountIsOrderMuSquared) {
  for (const Rational lambda : {Rational(21, 10), Rational(5, 2), Rational(14, 5)}) {
    const TailParameters P(lambda);
    double worst = 0.0;
    for (int p = 1; p <= 12; ++p) {
      // side^2 - hole^2 in layer-p cells
      const double side = static_cast<double>(P.alpha(p) + P.mu(p) - P.beta(p));
      const double hole = static_cast<double>(P.alpha(p) - P.beta(p) - P.mu(p));
      const double count = side * side - hole * hole;
      if (p <= 5) {
        EXPECT_EQ(static_cast<double>(tail_layer({0, 0, 0}, p, P).size()), count);
      }
      const double mu = static_cast<double>(P.mu(p));
      worst = std::max(worst, count / (mu * mu));
    }
    const double l = lambda.to_double();
    EXPECT_LE(worst, 8.0 * l / (l - 2.0)) << lambda;
    RecordProperty("max_count_over_mu2_" + lambda.str(), std::to_string(worst));
  }
}

TEST(Tail, VolumeDecaysGeometrically) {
  // #t_p 2^{-3p} decreases by a fixed factor for large p.
  double prev = 0.0;
  for (int p = 1; p <= 30; ++p) {
    const double side = static_cast<double>(kParams.alpha(p) + kParams.mu(p) - kParams.beta(p));
    const double hole = static_cast<double>(kParams.alpha(p) - kParams.beta(p) - kParams.mu(p));
    const double v = (side * side - hole * hole) * std::ldexp(1.0, -3 * p);
    if (p > 6) {
      EXPECT_LT(v, prev) << p;
    }
    if (p == 30) {
      EXPECT_NEAR(v / prev, 6.25 / 8.0, 0.01);
    }
    prev = v;
  }
}
