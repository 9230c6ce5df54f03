#include <gtest/gtest.h>

#include <random>

#include "nazarov/riesz_engine.hpp"

using namespace nazarov;

namespace {

BumpSum single(Point c = {0, 0}, double s = 1.0) {
  return BumpSum({BumpTerm({Rational::parse(std::to_string(c.x)), Rational::parse(std::to_string(c.y))},
                           Rational::parse(std::to_string(s)))},
                 1.0);
}

BumpSum five_terms() {
  return BumpSum({BumpTerm({Rational(0), Rational(0)}, Rational(1)),
                  BumpTerm({Rational(1), Rational(0)}, Rational(1, 2)),
                  BumpTerm({Rational(-1, 2), Rational(3, 4)}, Rational(1, 2)),
                  BumpTerm({Rational(3, 8), Rational(-7, 8)}, Rational(1, 4)),
                  BumpTerm({Rational(-3, 4), Rational(-3, 4)}, Rational(1, 4))},
                 1.0);
}

/// Midpoint rule over the cup support; only valid away from the support.
double far_field_oracle(Point y, int j, int n = 600) {
  const double h = 1.5 / n;
  double s = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Point t{-0.75 + (b + 0.5) * h, -0.75 + (a + 0.5) * h};
      s += RieszKernel(j, false).kernel(y, t) * cup::eval(t);
    }
  return RieszKernel::c2 * s * h * h;
}

double far_deriv_oracle(Point y, int j, int i, int n = 600) {
  const double h = 1.5 / n;
  double s = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Point t{-0.75 + (b + 0.5) * h, -0.75 + (a + 0.5) * h};
      s += RieszKernel(j, false).kernel_dx(y, t, i) * cup::eval(t);
    }
  return RieszKernel::c2 * s * h * h;
}

int spectral_sign() {
  static const int s = calibrate_spectral_sign(256).sign;
  return s;
}

/// Max |spectral - p.v.| over 64 Halton grid nodes of [-1,1]^2 (nodes shared by both grids).
double spectral_disagreement(const BumpSum& F, double L, int n) {
  const RieszEvaluator ev(F);
  const SpectralGrid g = sample_grid(F, {0, 0}, L, n);
  double e = 0.0;
  const int stride = n / 256;
  for (int j = 1; j <= 2; ++j) {
    const SpectralResult s = riesz_spectral(g, j, spectral_sign(), ev.correction_constants()[static_cast<std::size_t>(j - 1)]);
    for (std::size_t i = 0; i < 64; ++i) {
      const Point u = halton(i);
      int b = static_cast<int>(std::lround((2 * u.x - 1) / (g.h * stride))) * stride + n / 2;
      int a = static_cast<int>(std::lround((2 * u.y - 1) / (g.h * stride))) * stride + n / 2;
      e = std::max(e, std::abs(s.field.at(a, b) - ev.value(j, g.node(a, b))));
    }
  }
  return e;
}

}  // namespace

TEST(RieszKernel, OddAndDerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 2000; ++k) {
    const Point x{u(rng), u(rng)}, d{u(rng), u(rng)};
    if (norm(d) < 0.2) continue;
    for (int j = 1; j <= 2; ++j) {
      const RieszKernel K(j);
      EXPECT_NEAR(K.kernel(x, x + d), -K.kernel(x, x - d), 1e-12);
      for (int i = 1; i <= 2; ++i) {
        const double h = 1e-6;
        const Point e = i == 1 ? Point{h, 0} : Point{0, h};
        const double fd = (K.kernel(x + e, x + d) - K.kernel(x - e, x + d)) / (2 * h);
        EXPECT_NEAR(K.kernel_dx(x, x + d, i), fd, 1e-5 * (1 + std::abs(fd)));
      }
    }
  }
  EXPECT_THROW(RieszKernel(3), std::invalid_argument);
}

TEST(RieszPv, VanishesAtCenterOfSymmetry) {
  const BumpSum F = single();
  EXPECT_NEAR(riesz_pv(F, 1, {0, 0}), 0.0, 1e-10);
  EXPECT_NEAR(riesz_pv(F, 2, {0, 0}), 0.0, 1e-10);
  // Off-origin cup: the p.v. part still vanishes, leaving minus the correction.
  const BumpSum G = single({2, 1}, 0.5);
  const RieszEvaluator ev(G);
  EXPECT_NEAR(ev.value(1, {2, 1}), -ev.correction_constants()[0], 1e-10);
  EXPECT_NEAR(ev.value(2, {2, 1}), -ev.correction_constants()[1], 1e-10);
  EXPECT_GT(std::abs(ev.correction_constants()[0]), 1e-4);
}

TEST(RieszPv, CorrectionVanishesForEvenFunctions) {
  const auto c = correction(single({0, 3}, 0.5));
  EXPECT_NEAR(c[0], 0.0, 1e-15);
  EXPECT_GT(std::abs(c[1]), 1e-4);
  // Against a direct quadrature of c2 int t_j (1+|t|^2)^{-3/2} F.
  const BumpSum F = single({0.5, -1.0}, 0.5);
  const auto cf = correction(F);
  const int n = 800;
  const double h = 0.75 / n;
  double s1 = 0, s2 = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Point t{0.5 - 0.375 + (b + 0.5) * h, -1.0 - 0.375 + (a + 0.5) * h};
      s1 += RieszKernel(1).correction_weight(t) * F(t);
      s2 += RieszKernel(2).correction_weight(t) * F(t);
    }
  EXPECT_NEAR(cf[0], RieszKernel::c2 * s1 * h * h, 1e-9);
  EXPECT_NEAR(cf[1], RieszKernel::c2 * s2 * h * h, 1e-9);
}

TEST(RieszPv, OddSymmetryUnderReflection) {
  // R_1 of an x_1-even function is odd in x_1 about the axis of symmetry.
  const BumpSum F = single();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 50; ++k) {
    const Point x{u(rng), u(rng)};
    EXPECT_NEAR(riesz_pv(F, 1, x), -riesz_pv(F, 1, {-x.x, x.y}), 1e-9);
    EXPECT_NEAR(riesz_pv(F, 1, x), riesz_pv(F, 1, {x.x, -x.y}), 1e-9);
    EXPECT_NEAR(riesz_pv(F, 1, x), riesz_pv(F, 2, {x.y, x.x}), 1e-9);
  }
}

TEST(RieszPv, FarFieldMatchesDirectQuadrature) {
  for (const Point y : {Point{3.5, 0.2}, Point{-4.0, 3.0}, Point{0.5, 10.0}, Point{30.0, -20.0}})
    for (int j = 1; j <= 2; ++j) {
      const double expect = far_field_oracle(y, j);
      EXPECT_NEAR(cup_riesz(y).value[static_cast<std::size_t>(j - 1)], expect, 1e-9 * (1 + std::abs(expect))) << y.x;
      EXPECT_NEAR(cup_riesz(y, fast_riesz()).value[static_cast<std::size_t>(j - 1)], expect, 1e-6) << y.x;
      for (int i = 1; i <= 2; ++i) {
        const double d = far_deriv_oracle(y, j, i);
        EXPECT_NEAR(cup_riesz(y).grad[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)], d, 1e-9);
      }
    }
}

TEST(RieszPv, FarFieldKernelBound) {
  // |d_1 R_1 phi_a (x)| <= 2 c2 int phi_a / dist^3 with dist from x to supp phi_a.
  const BumpSum F = single({0.3, -0.2}, 0.25);
  for (const Point x : {Point{2.0, 0.0}, Point{-1.5, 1.5}, Point{0.3, 4.0}}) {
    const double dx = std::max(0.0, std::abs(x.x - 0.3) - 0.1875), dy = std::max(0.0, std::abs(x.y + 0.2) - 0.1875);
    const double dist = std::hypot(dx, dy);
    ASSERT_GE(dist, 4 * 0.25);
    EXPECT_LE(std::abs(riesz_deriv(F, 1, 1, x)), 2 * RieszKernel::c2 * F.integral() / (dist * dist * dist));
  }
}

TEST(RieszPv, ScaleCovarianceAgainstReferenceCup) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  const std::int64_t dens[] = {1, 2, 4, 8};
  for (int k = 0; k < 100; ++k) {
    const Rational s(1, dens[k % 4]);
    const Rational cx(static_cast<std::int64_t>(u(rng) * 8), 8), cy(static_cast<std::int64_t>(u(rng) * 8), 8);
    const BumpSum F({BumpTerm({cx, cy}, s)}, 1.0);
    const RieszEvaluator ev(F);
    const Point x{u(rng), u(rng)};
    const Point y{(x.x - cx.to_double()) / s.to_double(), (x.y - cy.to_double()) / s.to_double()};
    // Reference cup value from the direct polar rule (independent of the dispatch).
    const CupRiesz ref = cup_riesz_polar(y, 1e-11);
    for (int j = 1; j <= 2; ++j) {
      const double lhs = ev.value(j, x) + ev.correction_constants()[static_cast<std::size_t>(j - 1)];
      EXPECT_NEAR(lhs, s.to_double() * ref.value[static_cast<std::size_t>(j - 1)], 1e-8);
    }
  }
}

TEST(RieszDeriv, MatchesFiniteDifferencesOfPv) {
  // Central differences at steps h and 2h; their errors against the
  // quadrature derivative must scale like h^2 (pure truncation), and the
  // Richardson combination must agree far below the truncation level.
  const BumpSum F = five_terms();
  const RieszEvaluator ev(F);
  const double h = 1e-4;
  double plain = 0.0, twice = 0.0, rich = 0.0;
  for (std::size_t k = 0; k < 30; ++k) {
    const Point u = halton(k);
    const Point x{-1.2 + 2.4 * u.x, -1.2 + 2.4 * u.y};
    for (int i = 1; i <= 2; ++i) {
      const Point e = i == 1 ? Point{h, 0} : Point{0, h};
      const RieszJet p1 = ev.jet(x + e, true, false), m1 = ev.jet(x - e, true, false);
      const RieszJet p2 = ev.jet(x + 2 * e, true, false), m2 = ev.jet(x - 2 * e, true, false);
      const RieszJet d = ev.jet(x, false, true);
      for (std::size_t j = 0; j < 2; ++j) {
        const double f1 = (p1.value[j] - m1.value[j]) / (2 * h), f2 = (p2.value[j] - m2.value[j]) / (4 * h);
        const double g = d.grad[static_cast<std::size_t>(i - 1)][j];
        plain = std::max(plain, std::abs(f1 - g));
        twice = std::max(twice, std::abs(f2 - g));
        rich = std::max(rich, std::abs((4 * f1 - f2) / 3 - g));
      }
    }
  }
  EXPECT_LE(rich, 1e-6);
  EXPECT_NEAR(twice / plain, 4.0, 0.1);
  RecordProperty("plain_fd_error", std::to_string(plain));
  RecordProperty("richardson_fd_error", std::to_string(rich));
}

TEST(RieszDeriv, UnitCupPlainCentralDifferences) {
  const BumpSum F = single();
  const RieszEvaluator ev(F);
  const double h = 1e-4;
  double worst = 0.0;
  for (std::size_t k = 0; k < 40; ++k) {
    const Point u = halton(k);
    const Point x{-1.2 + 2.4 * u.x, -1.2 + 2.4 * u.y};
    const double fd = (ev.value(1, {x.x + h, x.y}) - ev.value(1, {x.x - h, x.y})) / (2 * h);
    worst = std::max(worst, std::abs(fd - ev.deriv(1, 1, x)));
  }
  // h^2/6 sup |d^3 R_1 phi| is about 1e-5 at this step.
  EXPECT_LE(worst, 2e-5);
}

TEST(RieszDeriv, ZeroFunction) {
  const BumpSum F;
  EXPECT_EQ(riesz_pv(F, 1, {0.3, 0.2}), 0.0);
  EXPECT_EQ(riesz_deriv(F, 2, 1, {0.3, 0.2}), 0.0);
  EXPECT_THROW(riesz_deriv(F, 1, 3, {0, 0}), std::invalid_argument);
}

TEST(RieszModes, FastAgreesWithAccurate) {
  const BumpSum F = five_terms();
  const RieszEvaluator acc(F), fast(F, fast_riesz());
  double worst = 0.0;
  for (std::size_t k = 0; k < 80; ++k) {
    const Point u = halton(k);
    const Point x{-3 + 6 * u.x, -3 + 6 * u.y};
    const RieszJet a = acc.jet(x), b = fast.jet(x);
    for (int j = 0; j < 2; ++j) {
      worst = std::max(worst, std::abs(a.value[j] - b.value[j]));
      for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(a.grad[i][j] - b.grad[i][j]));
    }
  }
  EXPECT_LE(worst, 1e-4);
  RecordProperty("fast_vs_accurate", std::to_string(worst));
}

TEST(Spectral, SignCalibratesToPlusOne) {
  const SignCalibration c = calibrate_spectral_sign(256);
  EXPECT_EQ(c.sign, 1);
  EXPECT_LT(c.error_plus, 0.1 * c.error_minus);
}

TEST(Spectral, Linearity) {
  const BumpSum A = single({0.5, 0}, 0.5), B = single({-0.5, 0.25}, 0.25);
  std::vector<BumpTerm> both = A.terms();
  both.insert(both.end(), B.terms().begin(), B.terms().end());
  const BumpSum AB(both, 1.0);
  const double L = 8;
  const int n = 128;
  const auto ra = riesz_spectral(sample_grid(A, {0, 0}, L, n), 1, 1);
  const auto rb = riesz_spectral(sample_grid(B, {0, 0}, L, n), 1, 1);
  const auto rab = riesz_spectral(sample_grid(AB, {0, 0}, L, n), 1, 1);
  for (std::size_t k = 0; k < rab.field.v.size(); ++k)
    EXPECT_NEAR(rab.field.v[k], ra.field.v[k] + rb.field.v[k], 1e-13);
}

TEST(Spectral, FlagsInsufficientPadding) {
  EXPECT_TRUE(riesz_spectral(sample_grid(single(), {0, 0}, 1.2, 64), 1, 1).aliasing_warning);
  EXPECT_FALSE(riesz_spectral(sample_grid(single(), {0, 0}, 8, 64), 1, 1).aliasing_warning);
}

TEST(Spectral, SingleCupAgreementAndRefinement) {
  const double e256 = spectral_disagreement(single(), 16, 256);
  const double e512 = spectral_disagreement(single(), 16, 512);
  EXPECT_LE(e512, 1e-2);
  EXPECT_GE(e256 / e512, 2.0);
  RecordProperty("e256", std::to_string(e256));
  RecordProperty("e512", std::to_string(e512));
}

TEST(LipEstimate, ConstantAndLinearFields) {
  const Rect r{-1, -1, 1, 1};
  const LipEstimate c = lip_estimate([](Point) { return 2.0; }, [](Point) { return Point{0, 0}; }, r, 100, 50);
  EXPECT_EQ(c.grad_sup, 0.0);
  EXPECT_EQ(c.quotient_sup, 0.0);
  const double k = 3.7;
  const LipEstimate l = lip_estimate([k](Point p) { return k * p.x; }, [k](Point) { return Point{k, 0}; }, r, 100, 50);
  EXPECT_NEAR(l.grad_sup, k, 1e-12);
  EXPECT_LE(l.quotient_sup, k + 1e-6);
  EXPECT_NEAR(l.quotient_sup, k, 0.05 * k);
}

TEST(LipEstimate, AnchorsFindTheCupPeakAtEveryScale) {
  for (const double s : {1.0, 0.25, 0.0625}) {
    const BumpSum F = single({0.5, -0.5}, s);
    const auto anchors = anchor_probes(F, 8);
    ASSERT_EQ(anchors.size(), 4u);
    EXPECT_DOUBLE_EQ(anchors[0].x, 0.5 + kSteepestOffset * s);
    const RieszLip lip = riesz_lip_estimate(F, Rect{0.5 - s, -0.5 - s, 0.5 + s, -0.5 + s}, 0, 0, {}, anchors);
    EXPECT_NEAR(lip.r1.grad_sup, 6.34, 0.01) << s;
    EXPECT_NEAR(lip.r2.grad_sup, lip.r1.grad_sup, 1e-9) << s;
  }
}

TEST(LipEstimate, QuotientsBelowGradientSup) {
  const BumpSum F = five_terms();
  const RieszLip lip = riesz_lip_estimate(F, Rect{-1.5, -1.5, 1.5, 1.5}, 400, 64, fast_riesz(), anchor_probes(F, 8));
  EXPECT_LE(lip.r1.quotient_sup, lip.r1.grad_sup + 1e-3);
  EXPECT_LE(lip.r2.quotient_sup, lip.r2.grad_sup + 1e-3);
}

TEST(SplitSums, AddUpToTheDerivative) {
  const LocalBuild b = build_local(make_cone({0.1, 0.05}, 0.3, 1.5), Square{{Rational(0), Rational(0)}, Rational(1)}, 1.0,
                                   [] { LocalOptions o; o.depth_max = 7; return o; }());
  const BumpSum G = b.normalized();
  const RieszEvaluator ev(G);
  for (std::size_t a = 0; a < b.family.tau.size(); a += std::max<std::size_t>(1, b.family.tau.size() / 10)) {
    const BumpTerm t = LocalBuild::normalized_term(b.family.tau[a]);
    const Point x{t.cx + 0.3 * t.s, t.cy - 0.2 * t.s};
    const SplitSums s = split_sums(b.family, a, x);
    EXPECT_NEAR(s.s1 + s.s2 + s.s3, ev.deriv(1, 1, x), 1e-8);
  }
}
