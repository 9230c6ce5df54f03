#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "nazarov/rational.hpp"

using nazarov::Rational;

TEST(Rational, NormalizesSignAndGcd) {
  Rational r(6, -4);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 2);
  EXPECT_EQ(Rational(0, -7), Rational(0));
  EXPECT_EQ(Rational(0, -7).den(), 1);
}

TEST(Rational, FieldOperations) {
  const Rational a(1, 3), b(5, 6);
  EXPECT_EQ(a + b, Rational(7, 6));
  EXPECT_EQ(a - b, Rational(-1, 2));
  EXPECT_EQ(a * b, Rational(5, 18));
  EXPECT_EQ(a / b, Rational(2, 5));
  EXPECT_EQ(-a, Rational(-1, 3));
  EXPECT_THROW(a / Rational(0), std::domain_error);
  EXPECT_THROW(Rational(1, 0), std::domain_error);
}

TEST(Rational, OrderingMatchesCrossMultiplication) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> num(-1000, 1000), den(1, 1000);
  for (int i = 0; i < 5000; ++i) {
    const Rational a(num(rng), den(rng)), b(num(rng), den(rng));
    const bool lt = static_cast<__int128>(a.num()) * b.den() < static_cast<__int128>(b.num()) * a.den();
    EXPECT_EQ(a < b, lt);
    EXPECT_EQ(a + b - b, a);
  }
}

TEST(Rational, FloorRoundsTowardMinusInfinity) {
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(-7, 2).floor(), -4);
  EXPECT_EQ(Rational(-4, 2).floor(), -2);
  EXPECT_EQ(Rational(0).floor(), 0);
}

TEST(Rational, ParseForms) {
  EXPECT_EQ(Rational::parse("5/2"), Rational(5, 2));
  EXPECT_EQ(Rational::parse("2.5"), Rational(5, 2));
  EXPECT_EQ(Rational::parse("2.8"), Rational(14, 5));
  EXPECT_EQ(Rational::parse("-3"), Rational(-3));
  EXPECT_EQ(Rational(21, 10).str(), "21/10");
  EXPECT_EQ(Rational(4).str(), "4");
}

TEST(Rational, PowersOfTwo) {
  EXPECT_EQ(Rational::pow2(0), Rational(1));
  EXPECT_EQ(Rational::pow2(10), Rational(1024));
  EXPECT_EQ(Rational::pow2(-3), Rational(1, 8));
  EXPECT_THROW(Rational::pow2(63), std::overflow_error);
}

TEST(Rational, OverflowIsReportedNotWrapped) {
  const Rational big(std::numeric_limits<std::int64_t>::max());
  EXPECT_THROW(big + Rational(1), std::overflow_error);
  EXPECT_THROW(big * Rational(2), std::overflow_error);
  // Reduction keeps representable results representable.
  EXPECT_EQ(big * Rational(1, 2) * Rational(2), big);
}
