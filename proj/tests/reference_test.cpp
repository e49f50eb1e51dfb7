#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "affscale/reference.hpp"

using namespace affscale;
constexpr double pi = std::numbers::pi;

TEST(ContinuousKernel, CentreValue) {
  const auto k = continuous_kernel(CovarianceSpec(), 5, 5);
  EXPECT_NEAR(k(2, 2), 1 / (2 * pi), 1e-15);
}

TEST(ContinuousKernel, AnisotropicValue) {
  const auto k = continuous_kernel(CovarianceSpec(4, 0, 1), 5, 5);
  EXPECT_NEAR(k(4, 2), std::exp(-0.5) / (4 * pi), 1e-15);
}

TEST(ContinuousKernel, EvenSymmetry) {
  const auto k = continuous_kernel(from_eigen(5, 2, 0.6), 9, 7);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 9; ++c) EXPECT_EQ(k(c, r), k(8 - c, 6 - r));
}

TEST(ContinuousKernel, OrientationFollowsYUp) {
  // Major axis along +45 degrees: (1, 1) is up and to the right.
  const auto k = continuous_kernel(from_eigen(4, 1, pi / 4), 5, 5);
  EXPECT_GT(k(3, 1), k(3, 3));
}

TEST(ContinuousKernel, RejectsEvenSize) {
  EXPECT_THROW(continuous_kernel(CovarianceSpec(), 4, 5), Error);
}

TEST(ContinuousKernel, MassIncreasesWithGrid) {
  const auto spec = from_eigen(9, 3, 0.4);
  double prev = 0;
  for (int n : {5, 9, 15, 25, 41}) {
    const double m = sum(continuous_kernel(spec, n, n));
    EXPECT_GT(m, prev);
    prev = m;
  }
  EXPECT_NEAR(prev, 1.0, 1e-6);
}

TEST(Derivative, Examples) {
  const auto d = continuous_directional_derivative(CovarianceSpec(), 0, 1, 0, 5, 5);
  EXPECT_EQ(d(2, 2), 0.0);
  const auto d2 = continuous_directional_derivative(CovarianceSpec(), 0, 2, 0, 5, 5);
  EXPECT_NEAR(d2(2, 2), -1 / (2 * pi), 1e-15);
  const auto d0 = continuous_directional_derivative(from_eigen(3, 1, 1), 0.2, 0, 0, 7, 7);
  const auto k = continuous_kernel(from_eigen(3, 1, 1), 7, 7);
  for (std::size_t i = 0; i < k.size(); ++i) EXPECT_EQ(d0.data()[i], k.data()[i]);
  EXPECT_THROW(continuous_directional_derivative(CovarianceSpec(), 0, 2, 1, 5, 5), Error);
}

// Independent oracle: central finite differences of the kernel value along
// the directions v and w.
TEST(Derivative, MatchesFiniteDifferences) {
  const auto spec = from_eigen(3, 1.2, 0.7);
  const double phi = 0.3;
  const AffineGaussian g(spec, phi);
  const double v[2] = {std::cos(phi), std::sin(phi)};
  const double w[2] = {-std::sin(phi), std::cos(phi)};
  const double h = 1e-4;
  auto f = [&](double x, double y) { return g.value(x, y); };
  auto dir = [&](auto fn, const double* a) {
    return [=](double x, double y) { return (fn(x + h * a[0], y + h * a[1]) - fn(x - h * a[0], y - h * a[1])) / (2 * h); };
  };
  const auto fv = dir(f, v), fw = dir(f, w);
  const auto fvv = dir(fv, v), fvw = dir(fw, v), fww = dir(fw, w);
  for (double x : {-1.3, 0.2, 1.7})
    for (double y : {-0.8, 0.5, 2.1}) {
      EXPECT_NEAR(g.derivative(1, 0, x, y), fv(x, y), 1e-8);
      EXPECT_NEAR(g.derivative(0, 1, x, y), fw(x, y), 1e-8);
      EXPECT_NEAR(g.derivative(2, 0, x, y), fvv(x, y), 1e-6);
      EXPECT_NEAR(g.derivative(1, 1, x, y), fvw(x, y), 1e-6);
      EXPECT_NEAR(g.derivative(0, 2, x, y), fww(x, y), 1e-6);
    }
}

TEST(Derivative, AffineCovarianceAtMappedPoints) {
  const auto spec = from_eigen(2, 0.5, 0.3);
  const double A[4] = {1.4, 0.3, -0.2, 0.9};
  const double det_a = A[0] * A[3] - A[1] * A[2];
  const AffineGaussian g(spec, 0), ga(affine_transform(spec, A[0], A[1], A[2], A[3]), 0);
  for (double x : {-1.0, 0.0, 0.7})
    for (double y : {-0.4, 1.1}) {
      const double X = A[0] * x + A[1] * y, Y = A[2] * x + A[3] * y;
      EXPECT_NEAR(ga.value(X, Y) * det_a, g.value(x, y), 1e-15);
    }
}

TEST(LpNorm, UnitMass) {
  for (const auto& s : {CovarianceSpec(), from_eigen(16, 2, 0.4), from_eigen(1, 0.2, 2.0)})
    EXPECT_NEAR(lp_norm_continuous(s, 0, 0, 0, 1), 1.0, 1e-9);
}

TEST(LpNorm, FirstOrderL1) {
  EXPECT_NEAR(lp_norm_continuous(CovarianceSpec(), 0, 1, 0, 1), std::sqrt(2 / pi), 1e-9);
  EXPECT_NEAR(lp_norm_continuous(CovarianceSpec(9, 0, 9), 0.8, 1, 0, 1), std::sqrt(2 / pi) / 3,
              1e-9);
  // Along the major axis of diag(a^2, b^2) only a matters.
  EXPECT_NEAR(lp_norm_continuous(CovarianceSpec(4, 0, 0.25), 0, 1, 0, 1), std::sqrt(2 / pi) / 2,
              1e-9);
  EXPECT_NEAR(lp_norm_continuous(CovarianceSpec(4, 0, 0.25), 0, 0, 1, 1), std::sqrt(2 / pi) * 2,
              1e-8);
}

TEST(LpNorm, SecondOrderL1) {
  // E|X^2 - 1| = 4 phi(1) and E|XY| = 2/pi for standard normals.
  const double phi1 = std::exp(-0.5) / std::sqrt(2 * pi);
  EXPECT_NEAR(lp_norm_continuous(CovarianceSpec(), 0, 2, 0, 1), 4 * phi1, 1e-9);
  EXPECT_NEAR(lp_norm_continuous(CovarianceSpec(), 0.5, 0, 2, 1), 4 * phi1, 1e-9);
  EXPECT_NEAR(lp_norm_continuous(CovarianceSpec(), 0, 1, 1, 1), 2 / pi, 1e-9);
}

TEST(LpNorm, L2ClosedForm) {
  for (const auto& s : {CovarianceSpec(), from_eigen(6, 1.5, 0.9)}) {
    const double expect = 1 / (2 * std::sqrt(pi) * std::pow(s.det(), 0.25));
    EXPECT_NEAR(lp_norm_continuous(s, 0, 0, 0, 2), expect, 1e-9 * expect);
  }
}

TEST(LpNorm, OddOrdersIntegrateToZero) {
  const auto s = from_eigen(5, 1, 0.7);
  EXPECT_NEAR(integrate_continuous(s, 0.2, 1, 0, 1, false), 0.0, 1e-10);
  EXPECT_NEAR(integrate_continuous(s, 0.2, 0, 1, 1, false), 0.0, 1e-10);
}

TEST(LpNorm, RejectsSmallP) {
  EXPECT_THROW(lp_norm_continuous(CovarianceSpec(), 0, 1, 0, 0.5), Error);
}
