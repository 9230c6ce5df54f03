#include <gtest/gtest.h>

#include <random>

#include "nazarov/global_majorant.hpp"

using namespace nazarov;

namespace {

GlobalOptions quick_options(int k_max = 6) {
  GlobalOptions o;
  o.k_max = k_max;
  o.local.depth_max = 6;
  o.local.tail_depth = 6;
  o.pre.grid = 256;
  o.pre.samples = 2000;
  return o;
}

/// Midpoint rule for int l(a) phi_a dP over the cup support, per term.
double poisson_oracle(const BumpSum& F, int n = 400) {
  double total = 0.0;
  for (const auto& t : F.terms()) {
    const double h = 1.5 * t.s / n;
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const Point p{t.cx - 0.75 * t.s + (b + 0.5) * h, t.cy - 0.75 * t.s + (a + 0.5) * h};
        s += cup::eval({(p.x - t.cx) / t.s, (p.y - t.cy) / t.s}) * poisson_weight(p);
      }
    total += t.s * s * h * h;
  }
  return F.height() * total;
}

}  // namespace

TEST(PlaneCover, SquareExamples) {
  EXPECT_EQ(Rect::of(cover_square(0, 0, 0)), (Rect{-1, -1, 1, 1}));
  EXPECT_EQ(Rect::of(cover_square(1, 0, 2)), (Rect{4, 0, 8, 4}));
  EXPECT_EQ(Rect::of(cover_square(-1, -1, 0)), (Rect{-1, -1, 0, 0}));
  EXPECT_EQ(Rect::of(cover_square(-2, 1, 1)), (Rect{-4, 2, -2, 4}));
  EXPECT_THROW(cover_square(2, 0, 0), std::invalid_argument);
  EXPECT_THROW(cover_square(0, 0, 1), std::invalid_argument);
  EXPECT_THROW(cover_square(1, 1, -1), std::invalid_argument);
  EXPECT_THROW(plane_cover(-1), std::invalid_argument);
}

TEST(PlaneCover, CellCounts) {
  for (int k = 0; k <= 8; ++k) {
    EXPECT_EQ(plane_cover(k, CoverKind::verbatim).cells.size(), 1u + 8u * static_cast<unsigned>(k + 1));
    EXPECT_EQ(plane_cover(k, CoverKind::annular).cells.size(), 1u + 12u * static_cast<unsigned>(k + 1));
  }
  EXPECT_EQ(plane_cover(3, CoverKind::verbatim).reach(), 8.0);
  EXPECT_EQ(plane_cover(3, CoverKind::annular).reach(), 16.0);
}

TEST(PlaneCover, AnnularIsAPartitionBelowReach) {
  const PlaneCover pc = plane_cover(5, CoverKind::annular);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-pc.reach(), pc.reach());
  for (int n = 0; n < 10'000; ++n) {
    const Point x{u(rng), u(rng)};
    ASSERT_EQ(pc.multiplicity(x), 1u) << x.x << ", " << x.y;
    const double side = pc.owner(x)->square.side.to_double();
    if (norm_inf(x) >= 1) {
      EXPECT_LE(side, norm_inf(x));
      EXPECT_GT(2 * side, norm_inf(x));
    }
  }
  EXPECT_EQ(pc.multiplicity({pc.reach(), 0}), 0u);
  EXPECT_EQ(pc.multiplicity({0, -pc.reach() - 1}), 0u);
  EXPECT_EQ(pc.multiplicity({-pc.reach(), 0}), 1u);
}

TEST(PlaneCover, VerbatimCoversButNestsTowardsNegativeAxes) {
  for (int k_max = 2; k_max <= 6; ++k_max) {
    const PlaneCover pc = plane_cover(k_max, CoverKind::verbatim);
    std::mt19937_64 rng(static_cast<std::uint64_t>(k_max));
    std::uniform_real_distribution<double> u(-pc.reach(), pc.reach());
    for (int n = 0; n < 2000; ++n) EXPECT_GE(pc.multiplicity({u(rng), u(rng)}), 1u);
    // (-3, 1/2) lies in C_{-1,0,k} for every k >= 2.
    EXPECT_EQ(pc.multiplicity({-3.0, 0.5}), static_cast<std::size_t>(k_max - 1));
    EXPECT_EQ(pc.multiplicity({3.0, 0.5}), 1u);
  }
}

TEST(PlaneCover, RequiredKMax) {
  EXPECT_EQ(required_k_max(0.5), 0);
  EXPECT_EQ(required_k_max(1.99), 0);
  EXPECT_EQ(required_k_max(2.0), 1);
  EXPECT_EQ(required_k_max(300.0), 8);
  EXPECT_EQ(required_k_max(300.0, CoverKind::verbatim), 9);
  for (double r : {0.3, 5.0, 17.0, 100.0, 1000.0})
    for (CoverKind kind : {CoverKind::verbatim, CoverKind::annular}) {
      const int k = required_k_max(r, kind);
      EXPECT_GT(plane_cover_reach(k, kind), r);
      if (k > 0) {
        EXPECT_LE(plane_cover_reach(k - 1, kind), r);
      }
    }
}

TEST(Poisson, TailMassMatchesRadialQuadrature) {
  EXPECT_DOUBLE_EQ(poisson_tail_mass(0), 2 * std::numbers::pi);
  for (double r : {0.0, 0.5, 3.0, 40.0}) {
    // Substituting rho = r + u/(1-u) maps [r, inf) to [0, 1).
    const double v = integrate_adaptive(
                         [r](double u) {
                           const double rho = r + u / (1 - u);
                           return 2 * std::numbers::pi * rho * std::pow(1 + rho * rho, -1.5) / ((1 - u) * (1 - u));
                         },
                         0.0, 1.0, 1e-12)
                         .value;
    EXPECT_NEAR(poisson_tail_mass(r), v, 1e-9 * poisson_tail_mass(r)) << r;
  }
}

TEST(Poisson, IntegralMatchesQuadrature) {
  // Mix of terms handled by the moment expansion (small, far) and by Gauss (large, near).
  const BumpSum F({BumpTerm({Rational(0), Rational(0)}, Rational(1)), BumpTerm({Rational(3), Rational(-2)}, Rational(2)),
                   BumpTerm({Rational(20), Rational(5)}, Rational(1)), BumpTerm({Rational(-33, 2), Rational(7)}, Rational(1, 4)),
                   BumpTerm({Rational(100), Rational(-60)}, Rational(4))},
                  0.3);
  const double oracle = poisson_oracle(F);
  EXPECT_NEAR(poisson_integral(F), oracle, 1e-5 * oracle);
  // Term by term.
  for (const auto& t : F.terms()) {
    const BumpSum one({t}, 1.0);
    const double o = poisson_oracle(one);
    EXPECT_NEAR(poisson_integral(one), o, 2e-5 * o) << t.cx << ", " << t.cy;
  }
  EXPECT_EQ(poisson_integral(BumpSum{}), 0.0);
}

TEST(Preprocess, RejectsUnsupportedInput) {
  EXPECT_THROW(preprocess(make_constant(1.0), 0.1), UnsupportedInput);
  EXPECT_THROW(preprocess(make_cone({3, 0}, 0.1, 0.1), 0.0), std::invalid_argument);
}

TEST(Preprocess, GrowthChecksOnFarCone) {
  const Preprocessed p = preprocess(make_cone({24, 6}, 0.12, 0.04), 0.1, quick_options().pre);
  const PreprocessRecord& r = p.record;
  EXPECT_EQ(r.mu, 0.04);
  EXPECT_EQ(r.sigma, 1.0);
  EXPECT_GE(r.R, r.sigma);
  EXPECT_LE(r.tail_at_R + r.tail_error, 1e-3);
  EXPECT_EQ(r.M, 0.0);
  EXPECT_EQ(r.flat_violations, 0u);
  EXPECT_EQ(r.growth_violations, 0u);
  EXPECT_EQ(r.ky_violations, 0u);
  EXPECT_GT(r.C_ky, 0.0);
  EXPECT_NEAR(r.delta, 0.1 * std::max(0.5, 2 * std::numbers::sqrt2 * r.C_ky), 1e-15);
  // Against the cone's own Poisson integral by direct quadrature.
  const int n = 600;
  const double h = 6.0 / n;
  double s = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Point x{21 + (b + 0.5) * h, 3 + (a + 0.5) * h};
      s += p.omega(x) * poisson_weight(x);
    }
  EXPECT_NEAR(r.integral_P, s * h * h, 0.02 * s * h * h);
}

TEST(Preprocess, FlattensAroundTheOrigin) {
  const Preprocessed p = preprocess(make_cone({0, 0}, 1.0, 0.5), 0.1, quick_options().pre);
  EXPECT_EQ(p.record.sigma, 2.0);
  EXPECT_NEAR(p.record.M, 1.0, 1e-9);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int n = 0; n < 1000; ++n) EXPECT_EQ(p.omega_tilde({u(rng), u(rng)}), 0.0);
}

TEST(GlobalBuild, ConstantMajorantWhenFlatteningRemovesEverything) {
  const GlobalMajorant g = build_global(make_cone({0, 0}, 1.0, 0.5), 0.1, quick_options());
  EXPECT_TRUE(g.cells.empty());
  EXPECT_EQ(g.term_count(), 0u);
  EXPECT_NEAR(g({0.3, 0.1}), 1.0, 1e-9);
  const GlobalReport r = verify_global(g, [] { GlobalVerifyOptions o; o.samples_A = 5000; return o; }());
  EXPECT_TRUE(r.a.pass());
  EXPECT_NEAR(r.b.integral_omega1, 2 * std::numbers::pi * g.M(), 1e-12);
  EXPECT_EQ(r.c.lip(1), 0.0);
}

TEST(GlobalBuild, FarConeActivatesOnlyCellsMeetingItsSupport) {
  const FunctionOracle omega = make_cone({24, 6}, 0.12, 0.04);
  const GlobalMajorant g = build_global(omega, 0.1, quick_options());
  ASSERT_FALSE(g.cells.empty());
  EXPECT_EQ(g.cells.size() + g.skipped.size(), g.cover.cells.size());
  EXPECT_EQ(g.delta, 0.05);
  const Rect supp{21, 3, 27, 9};
  for (const auto& cm : g.cells) {
    const Rect r = Rect::of(cm.cell.square);
    EXPECT_TRUE(r.x0 < supp.x1 && supp.x0 < r.x1 && r.y0 < supp.y1 && supp.y0 < r.y1);
    EXPECT_FALSE(cm.build.F.empty());
  }
  for (const auto& c : g.skipped) EXPECT_EQ(g.pre.omega_tilde.sup_bound(Rect::of(c.square)), 0.0);
  const CheckA a = verify_A(g, 20'000);
  EXPECT_TRUE(a.pass()) << a.witness.x << ", " << a.witness.y;
  const CheckB b = verify_B(g);
  EXPECT_GT(b.ratio, 0.0);
  EXPECT_TRUE(std::isfinite(b.ratio));
  EXPECT_NEAR(b.integral_cells, poisson_oracle(g.all, 60), 1e-3 * b.integral_cells);
}

TEST(GlobalBuild, AnnularResultDoesNotDependOnKMax) {
  const FunctionOracle omega = make_patch({-26, 18}, 0.08, 4, 0.04);
  const GlobalMajorant g6 = build_global(omega, 0.1, quick_options(6));
  const GlobalMajorant g8 = build_global(omega, 0.1, quick_options(8));
  EXPECT_EQ(g6.term_count(), g8.term_count());
  EXPECT_EQ(verify_B(g6).ratio, verify_B(g8).ratio);
}

TEST(GlobalBuild, CoverTruncation) {
  const FunctionOracle omega = make_cone({300, 0}, 0.1, 0.05);
  try {
    build_global(omega, 0.1, quick_options(6));
    FAIL() << "expected CoverTruncationError";
  } catch (const CoverTruncationError& e) {
    EXPECT_EQ(e.required_k_max, 8);
  }
}

TEST(GlobalVerify, SplitProbesOfFarCone) {
  const GlobalMajorant g = build_global(make_cone({24, 6}, 0.12, 0.04), 0.1, quick_options());
  GlobalVerifyOptions o;
  o.probes_C = 32;
  o.pairs_C = 8;
  o.anchor_terms = 16;
  const CheckC c = verify_C(g, o);
  ASSERT_EQ(c.probes.size(), 32u);
  EXPECT_EQ(c.containment_failures, 0u);
  for (const auto& p : c.probes) {
    EXPECT_TRUE(p.owner.contains(p.x));
    EXPECT_LE(p.far_grad[0], p.far_bound + 1e-12);
    EXPECT_LE(p.far_grad[1], p.far_bound + 1e-12);
  }
  EXPECT_GT(c.lip(1), 0.0);
  EXPECT_LE(c.near_sup[0], c.lip(1) + 1e-3);
}
