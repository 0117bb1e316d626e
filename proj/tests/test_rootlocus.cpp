#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nonlocal/rootlocus.hpp"
#include "test_support.hpp"

using namespace nonlocal;
using nonlocal::testing::count_inside;
using nonlocal::testing::random_poly;

namespace {

void expect_contains(const ModulusBounds& b, const std::vector<Complex>& roots, double slack = 1e-9) {
  for (const auto& r : roots) {
    EXPECT_GE(std::abs(r), b.lower - slack) << to_string(b.method);
    EXPECT_LE(std::abs(r), b.upper + slack) << to_string(b.method);
  }
}

std::vector<Complex> sorted_by_arg(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) { return std::arg(a) < std::arg(b); });
  return v;
}

}  // namespace

TEST(Milovanovic, HandExamples) {
  const auto a = bound_milovanovic(ComplexPolynomial({4.0, 0.0, 1.0}));
  EXPECT_NEAR(a.upper, std::sqrt(17.0), 1e-14);
  EXPECT_NEAR(a.lower, 4.0 / std::sqrt(17.0), 1e-14);

  const auto b = bound_milovanovic(ComplexPolynomial({1.0, 0.0, 4.0}));
  EXPECT_NEAR(b.lower, 1.0 / std::sqrt(17.0), 1e-14);
  EXPECT_LE(b.lower, 0.5);

  const auto c = bound_milovanovic(ComplexPolynomial({-1.0, 1.0}));
  EXPECT_NEAR(c.lower, 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(c.upper, std::sqrt(2.0), 1e-14);
}

TEST(Milovanovic, ZeroRootFlagged) {
  const auto b = bound_milovanovic(ComplexPolynomial({0.0, 1.0, 1.0}));
  EXPECT_TRUE(b.zero_root);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_THROW(bound_milovanovic(ComplexPolynomial({1.0}), 2.0), InvalidInput);
  EXPECT_THROW(bound_milovanovic(ComplexPolynomial({1.0, 1.0}), 1.0), InvalidInput);
}

TEST(Fujiwara, HandExamples) {
  const auto a = bound_fujiwara(ComplexPolynomial({1.0, 0.0, 4.0}));
  EXPECT_NEAR(a.upper, 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(a.lower, 1.0 / (2.0 * std::sqrt(2.0)), 1e-14);
  const auto b = bound_fujiwara(ComplexPolynomial({-1.0, 0.0, 1.0}));
  EXPECT_NEAR(b.upper, std::sqrt(2.0), 1e-14);
  EXPECT_TRUE(bound_fujiwara(ComplexPolynomial({0.0, 1.0})).zero_root);
}

TEST(Linden, Containment) {
  for (const auto& p : {ComplexPolynomial({1.0, 0.0, 1.0}), ComplexPolynomial({1.0, 1.0, 1.0}),
                        ComplexPolynomial({6.0, 5.0, 1.0})}) {
    const auto b = bound_linden(p);
    expect_contains(b, roots_oracle(p), 0.0);
  }
  EXPECT_THROW(bound_linden(ComplexPolynomial({1.0, 1.0})), InvalidInput);
  EXPECT_THROW(bound_linden(ComplexPolynomial({0.0, 1.0, 1.0})), InvalidInput);
}

TEST(Bounds, SoundOnRandomFamily) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_poly(rng, 1 + i % 8);
    const auto roots = roots_oracle(p);
    expect_contains(bound_milovanovic(p), roots);
    expect_contains(bound_milovanovic(p, 3.0), roots);
    expect_contains(bound_fujiwara(p), roots);
    if (p.degree() >= 2) expect_contains(bound_linden(p), roots);
  }
}

TEST(SchurCohn, Examples) {
  EXPECT_EQ(schur_cohn_count(ComplexPolynomial({-0.5, 1.0}), 1.0).inside, 1u);
  EXPECT_EQ(schur_cohn_count(ComplexPolynomial({-2.0, 1.0}), 1.0).inside, 0u);
  // (u - 0.5)(u - 2) = u^2 - 2.5u + 1
  const auto c = schur_cohn_count(ComplexPolynomial({1.0, -2.5, 1.0}), 1.0);
  EXPECT_EQ(c.inside, 1u);
  EXPECT_FALSE(c.on_boundary);
  EXPECT_EQ(schur_cohn_count(ComplexPolynomial({1.0, -2.5, 1.0}), 3.0).inside, 2u);
  EXPECT_EQ(schur_cohn_count(ComplexPolynomial({1.0, -2.5, 1.0}), 0.1).inside, 0u);
}

TEST(SchurCohn, ZeroRootsAndConstants) {
  // u^2 (u - 3): two roots at the origin.
  const auto c = schur_cohn_count(ComplexPolynomial({0.0, 0.0, -3.0, 1.0}), 1.0);
  EXPECT_EQ(c.inside, 2u);
  EXPECT_EQ(schur_cohn_count(ComplexPolynomial({2.0}), 1.0).inside, 0u);
  EXPECT_THROW(schur_cohn_count(ComplexPolynomial({1.0, 1.0}), 0.0), InvalidInput);
}

TEST(SchurCohn, RootOnCircleIsBoundary) {
  EXPECT_TRUE(schur_cohn_count(ComplexPolynomial({1.0, 1.0}), 1.0).on_boundary);
  EXPECT_TRUE(schur_cohn_count(ComplexPolynomial({1.0, 0.0, 1.0}), 1.0).on_boundary);
}

TEST(SchurCohn, AgreesWithOracle) {
  std::mt19937_64 rng(12);
  int compared = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_poly(rng, 1 + i % 8);
    const auto roots = roots_oracle(p);
    for (double radius : {0.5, 1.0, 2.0}) {
      const bool near = std::any_of(roots.begin(), roots.end(),
                                    [&](Complex r) { return std::abs(std::abs(r) - radius) < 1e-10 * radius; });
      const auto c = schur_cohn_count(p, radius);
      if (near || c.on_boundary) continue;
      EXPECT_EQ(c.inside, count_inside(roots, radius));
      ++compared;
    }
  }
  EXPECT_GT(compared, 2900);
}

TEST(SchurCohn, HighDegreeSparse) {
  // 1 + 0.1 u^577 + 0.1 u^816: every root has modulus > 1.
  std::vector<Complex> c(817, 0.0);
  c[0] = 1.0;
  c[577] = 0.1;
  c[816] = 0.1;
  const ComplexPolynomial p(c);
  const auto roots = roots_oracle(p);
  const double min_mod = std::abs(*std::min_element(roots.begin(), roots.end(), [](Complex a, Complex b) {
    return std::abs(a) < std::abs(b);
  }));
  ASSERT_GT(min_mod, 1.0);
  EXPECT_EQ(schur_cohn_count(p, 1.0).inside, 0u);
  EXPECT_EQ(schur_cohn_count(p, 0.5 * (1.0 + min_mod)).inside, count_inside(roots, 0.5 * (1.0 + min_mod)));
}

TEST(AnnulusExclusion, Examples) {
  const auto ann = StripAnnulus::from_strip(kPi / 40.0, 1.0);
  EXPECT_EQ(annulus_exclusion(ComplexPolynomial({1.0, 0.5}), ann), AnnulusExclusion::Excluded);
  EXPECT_EQ(annulus_exclusion(ComplexPolynomial({1.0, 1.0}), ann), AnnulusExclusion::Intersects);
  // (1 - 2u)(1 - u/2) = 1 - 2.5u + u^2, roots 0.5 and 2, d = 0.
  EXPECT_EQ(annulus_exclusion(ComplexPolynomial({1.0, -2.5, 1.0}), StripAnnulus::from_strip(0.0, 1.0)),
            AnnulusExclusion::Excluded);
  // Root at the unit circle exactly with d = 0 cannot be decided by counting.
  EXPECT_EQ(annulus_exclusion(ComplexPolynomial({1.0, 1.0}), StripAnnulus::from_strip(0.0, 1.0)),
            AnnulusExclusion::Boundary);
}

TEST(AnnulusExclusion, MatchesOracleClassification) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dd(0.0, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_poly(rng, 1 + i % 8, 2.0);
    const auto ann = StripAnnulus::from_strip(dd(rng), 1.0);
    const auto roots = roots_oracle(p);
    const double tol = 1e-8;
    bool near = false, outside = true;
    for (const auto& r : roots) {
      const double m = std::abs(r);
      near = near || std::abs(m - ann.inner_radius) < tol || std::abs(m - ann.outer_radius) < tol;
      outside = outside && (m < ann.inner_radius - tol || m > ann.outer_radius + tol);
    }
    if (near) continue;
    const auto v = annulus_exclusion(p, ann);
    ASSERT_NE(v, AnnulusExclusion::Boundary);
    EXPECT_EQ(v == AnnulusExclusion::Excluded, outside);
  }
}

TEST(RootsOracle, Examples) {
  const auto a = sorted_by_arg(roots_oracle(ComplexPolynomial({1.0, 0.0, 1.0})));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NEAR(std::abs(a[0] - Complex(0, -1)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(a[1] - Complex(0, 1)), 0.0, 1e-12);

  const Complex alpha(0.3, -1.2);
  const auto b = roots_oracle(ComplexPolynomial({1.0, alpha}));
  ASSERT_EQ(b.size(), 1u);
  EXPECT_NEAR(std::abs(b[0] + 1.0 / alpha), 0.0, 1e-14);

  const auto c = sorted_by_arg(roots_oracle(ComplexPolynomial({-1.0, 0.0, 0.0, 1.0})));
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(std::abs(c[0] - std::polar(1.0, -2.0 * kPi / 3.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c[1] - Complex(1.0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(c[2] - std::polar(1.0, 2.0 * kPi / 3.0)), 0.0, 1e-12);
}

TEST(RootsOracle, MultiplicityAndZeroRoots) {
  // u^2 (u - 1)^2 (u + 2)
  const ComplexPolynomial p({0.0, 0.0, 2.0, -3.0, 0.0, 1.0});
  const auto roots = roots_oracle(p);
  ASSERT_EQ(roots.size(), 5u);
  EXPECT_EQ(std::count(roots.begin(), roots.end(), Complex(0.0)), 2);
  int near_one = 0;
  for (const auto& r : roots) near_one += std::abs(r - 1.0) < 1e-6;
  EXPECT_EQ(near_one, 2);
}

TEST(RootsOracle, ScalingCovariance) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_poly(rng, 1 + i % 8);
    const double rho = 0.5 + 2.0 * (i % 5) / 4.0;
    const auto base = roots_oracle(p);
    const auto scaled = roots_oracle(p.scaled(rho));
    for (const auto& r : base) {
      double best = INFINITY;
      for (const auto& s : scaled) best = std::min(best, std::abs(s - r / rho));
      EXPECT_LE(best, 1e-9 * std::max(1.0, std::abs(r / rho)));
    }
  }
}

TEST(RootsOracle, ResidualsBelowTolerance) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 200; ++i) {
    const auto p = random_poly(rng, 1 + i % 12);
    for (const auto& r : roots_oracle(p)) EXPECT_LE(relative_residual(p, r), 1e-12);
  }
}
