#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "affscale/covariance.hpp"

using namespace affscale;
constexpr double pi = std::numbers::pi;

TEST(FromEigen, AxisAligned) {
  const auto s = from_eigen(64, 16, 0);
  EXPECT_DOUBLE_EQ(s.cxx(), 64);
  EXPECT_DOUBLE_EQ(s.cxy(), 0);
  EXPECT_DOUBLE_EQ(s.cyy(), 16);
}

TEST(FromEigen, IsotropicIgnoresAngle) {
  const auto s = from_eigen(1, 1, 0.7);
  EXPECT_NEAR(s.cxx(), 1, 1e-15);
  EXPECT_NEAR(s.cxy(), 0, 1e-15);
  EXPECT_NEAR(s.cyy(), 1, 1e-15);
}

TEST(FromEigen, Diagonal45) {
  const auto s = from_eigen(2, 1, pi / 4);
  EXPECT_NEAR(s.cxx(), 1.5, 1e-15);
  EXPECT_NEAR(s.cxy(), 0.5, 1e-15);
  EXPECT_NEAR(s.cyy(), 1.5, 1e-15);
}

TEST(FromEigen, RejectsNonPositive) {
  EXPECT_THROW(from_eigen(0, 1, 0), Error);
  try {
    from_eigen(1, -1, 0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveEigenvalue);
  }
}

TEST(ToEigen, Examples) {
  auto e = to_eigen(CovarianceSpec(64, 0, 16));
  EXPECT_DOUBLE_EQ(e.lambda1, 64);
  EXPECT_DOUBLE_EQ(e.lambda2, 16);
  EXPECT_DOUBLE_EQ(e.alpha, 0);
  e = to_eigen(CovarianceSpec(1.5, 0.5, 1.5));
  EXPECT_NEAR(e.lambda1, 2, 1e-15);
  EXPECT_NEAR(e.lambda2, 1, 1e-15);
  EXPECT_NEAR(e.alpha, pi / 4, 1e-15);
  e = to_eigen(CovarianceSpec(1, 0, 1));
  EXPECT_EQ(e.alpha, 0.0);
  EXPECT_EQ(e.lambda1, 1.0);
  EXPECT_EQ(e.lambda2, 1.0);
}

TEST(ToEigen, VerticalMajorAxis) {
  const auto e = to_eigen(CovarianceSpec(1, 0, 4));
  EXPECT_DOUBLE_EQ(e.lambda1, 4);
  EXPECT_NEAR(e.alpha, pi / 2, 1e-15);
}

TEST(CovarianceSpec, RejectsIndefinite) {
  EXPECT_THROW(CovarianceSpec(1, 1, 1), Error);
  EXPECT_THROW(CovarianceSpec(-1, 0, 1), Error);
  EXPECT_THROW(CovarianceSpec(1, 2, 1), Error);
  EXPECT_NO_THROW(CovarianceSpec(1, 0.999, 1));
}

TEST(RoundTrip, RandomEigenForms) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> l(0.01, 100.0), a(0.0, pi);
  for (int i = 0; i < 10000; ++i) {
    double l1 = l(rng), l2 = l(rng);
    if (l1 < l2) std::swap(l1, l2);
    const auto s = from_eigen(l1, l2, a(rng));
    const auto e = to_eigen(s);
    const auto back = from_eigen(e.lambda1, e.lambda2, e.alpha);
    const double scale = std::max({std::abs(s.cxx()), std::abs(s.cyy()), 1e-300});
    EXPECT_NEAR(back.cxx(), s.cxx(), 1e-12 * scale);
    EXPECT_NEAR(back.cxy(), s.cxy(), 1e-12 * scale);
    EXPECT_NEAR(back.cyy(), s.cyy(), 1e-12 * scale);
    EXPECT_GE(e.lambda1, e.lambda2);
  }
}

TEST(AffineTransform, Examples) {
  const auto r = affine_transform(CovarianceSpec(4, 0, 1), 0, -1, 1, 0);
  EXPECT_NEAR(r.cxx(), 1, 1e-15);
  EXPECT_NEAR(r.cxy(), 0, 1e-15);
  EXPECT_NEAR(r.cyy(), 4, 1e-15);
  EXPECT_EQ(affine_transform(CovarianceSpec(), 1, 0, 0, 1), CovarianceSpec());
  const auto f = affine_transform(CovarianceSpec(), 2, 0, 0, 1);
  EXPECT_EQ(f, CovarianceSpec(4, 0, 1));
  EXPECT_THROW(affine_transform(CovarianceSpec(), 1, 2, 2, 4), Error);
}

TEST(AffineTransform, RotationShiftsOrientation) {
  const double t = 0.3;
  const auto s = from_eigen(5, 2, 0.4);
  const auto r = affine_transform(s, std::cos(t), -std::sin(t), std::sin(t), std::cos(t));
  const auto e = r.eigen();
  EXPECT_NEAR(e.lambda1, 5, 1e-12);
  EXPECT_NEAR(e.lambda2, 2, 1e-12);
  EXPECT_NEAR(e.alpha, 0.7, 1e-12);
}

TEST(AffineTransform, PreservesDefinitenessProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3), l(0.1, 10), a(0, pi);
  for (int i = 0; i < 2000; ++i) {
    const auto s = from_eigen(l(rng) + 10, l(rng), a(rng));
    double m[4];
    do {
      for (double& v : m) v = u(rng);
    } while (std::abs(m[0] * m[3] - m[1] * m[2]) < 0.05);
    const auto t = affine_transform(s, m[0], m[1], m[2], m[3]);
    const double det_a = m[0] * m[3] - m[1] * m[2];
    EXPECT_GT(t.det(), 0.0);
    EXPECT_NEAR(t.det(), s.det() * det_a * det_a, 1e-9 * t.det());
  }
}

TEST(Feasibility, Isotropic) {
  const auto f = cxxyy_feasibility(CovarianceSpec());
  EXPECT_EQ(f.lower, 0.0);
  EXPECT_EQ(f.upper, 1.0);
  EXPECT_TRUE(f.feasible);
}

TEST(Feasibility, WorstOrientation) {
  EXPECT_FALSE(cxxyy_feasibility(from_eigen(6, 1, pi / 8)).feasible);
  const double eps = 3 + 2 * std::sqrt(2.0);
  const auto f = cxxyy_feasibility(from_eigen(eps, 1, pi / 8));
  EXPECT_NEAR(f.lower, f.upper, 1e-9);
}

TEST(Feasibility, StrongerThanDefiniteness) {
  // Every feasible matrix is definite; the converse fails at eps = 8, pi/8.
  const auto witness = from_eigen(8, 1, pi / 8);
  EXPECT_GT(witness.det(), 0);
  EXPECT_FALSE(cxxyy_feasibility(witness).feasible);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> l(0.05, 1), a(0, pi);
  for (int i = 0; i < 1000; ++i) {
    const auto s = from_eigen(1, l(rng), a(rng));
    if (cxxyy_feasibility(s).feasible) {
      EXPECT_LT(std::abs(s.cxy()), std::sqrt(s.cxx() * s.cyy()));
    }
  }
}

TEST(MaxFeasibleEccentricity, Examples) {
  EXPECT_NEAR(max_feasible_eccentricity(pi / 8), 3 + 2 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(max_feasible_eccentricity(0), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(hemisphere_angle_for_eccentricity(3 + 2 * std::sqrt(2.0)), 65.53, 0.01);
}

TEST(MaxFeasibleEccentricity, MinimizedAtPiOver8) {
  double best = std::numeric_limits<double>::infinity(), arg = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double a = 0.5 * pi * i / 1000;
    const double e = max_feasible_eccentricity(a);
    if (e < best) {
      best = e;
      arg = a;
    }
  }
  EXPECT_NEAR(arg, pi / 8, 0.5 * pi / 1000 + 1e-12);
}

TEST(MaxFeasibleEccentricity, AgreesWithInterval) {
  for (double a : {0.1, 0.3, pi / 8, 0.6, 1.0}) {
    const double e = max_feasible_eccentricity(a);
    EXPECT_TRUE(cxxyy_feasibility(from_eigen(e * (1 - 1e-9), 1, a)).feasible);
    EXPECT_FALSE(cxxyy_feasibility(from_eigen(e * (1 + 1e-6), 1, a)).feasible);
  }
}

TEST(Normalize, SplitsScale) {
  const auto [unit, s] = normalize(from_eigen(64, 16, 0.5));
  EXPECT_NEAR(s, 64, 1e-12);
  EXPECT_TRUE(is_normalized(unit));
  EXPECT_NEAR(unit.lambda_min(), 0.25, 1e-12);
  EXPECT_THROW(require_normalized(CovarianceSpec(2, 0, 1)), Error);
}

TEST(Json, MatrixAndEigenForms) {
  const auto s = from_eigen(4, 1, 1.0);
  nlohmann::json j = s;
  EXPECT_EQ(j.get<CovarianceSpec>(), s);
  const auto e = nlohmann::json{{"lambda1", 4}, {"lambda2", 1}, {"alpha", 1.0}}.get<CovarianceSpec>();
  EXPECT_NEAR(e.cxy(), s.cxy(), 1e-15);
  EXPECT_THROW(nlohmann::json::object().get<CovarianceSpec>(), Error);
}
