#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "affscale/bank.hpp"

using namespace affscale;
constexpr double pi = std::numbers::pi;

namespace {

RealImage random_image(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  RealImage img(n, n);
  for (double& v : img.data()) v = u(rng);
  return img;
}

BankSpec single(double size, double ecc, int orientations) {
  BankSpec b;
  b.size_first = size;
  b.num_sizes = 1;
  b.ecc_first = ecc;
  b.num_eccentricities = 1;
  b.num_orientations = orientations;
  return b;
}

}  // namespace

TEST(EnumerateBank, SingleIsotropic) {
  auto b = single(4, 1, 1);
  b.orders = {{0, 0}};
  const auto e = enumerate_bank(b);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].spec, CovarianceSpec(4, 0, 4));
  EXPECT_TRUE(e[0].feasible);
}

TEST(EnumerateBank, SixOrientations) {
  const auto phis = single(4, 1, 6).orientations();
  ASSERT_EQ(phis.size(), 6u);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(phis[j], j * pi / 6, 1e-15);
}

TEST(EnumerateBank, DefaultsMirrorFigures) {
  const BankSpec b;
  const auto eccs = b.eccentricities();
  EXPECT_EQ(eccs, (std::vector<double>{1.0, 0.5, 0.25}));
  EXPECT_EQ(b.num_orientations, 6);
  EXPECT_EQ(b.orders.size(), 6u);
  EXPECT_EQ(enumerate_bank(b).size(), 3u * 6u * 6u);
}

TEST(EnumerateBank, FlagsInfeasibleEccentricity) {
  auto b = single(1, 1.0 / 6, 8);
  b.orders = {{0, 0}};
  const auto e = enumerate_bank(b);
  ASSERT_EQ(e.size(), 8u);
  EXPECT_NEAR(e[1].phi, pi / 8, 1e-15);
  EXPECT_FALSE(e[1].feasible);
  EXPECT_TRUE(e[0].feasible);
}

TEST(EnumerateBank, Errors) {
  auto b = single(1, 1, 0);
  EXPECT_THROW(enumerate_bank(b), Error);
  b = single(1, 1, 1);
  b.orders.clear();
  EXPECT_THROW(enumerate_bank(b), Error);
  b = single(1, 2.0, 1);
  EXPECT_THROW(enumerate_bank(b), Error);
}

TEST(HemisphereAngle, Examples) {
  EXPECT_EQ(hemisphere_angle(1.0), 0.0);
  EXPECT_NEAR(hemisphere_angle(1 / (3 + 2 * std::sqrt(2.0))), 65.5, 0.05);
  EXPECT_NEAR(hemisphere_angle(0.25), 60.0, 1e-12);
  EXPECT_THROW(hemisphere_angle(0.0), Error);
  EXPECT_THROW(hemisphere_angle(1.5), Error);
}

TEST(ApplyBank, ConstantImage) {
  const auto res = apply_bank(constant_image(32, 32, 0.5), single(4, 0.5, 3));
  for (const auto& [key, resp] : res.responses) {
    if (key.order_m + key.order_n == 0) continue;
    for (double v : resp.image.data()) EXPECT_NEAR(v, 0.0, 1e-13);
  }
}

TEST(ApplyBank, OrderZeroIsPlainSmoothing) {
  auto b = single(3, 0.5, 1);
  b.orders = {{0, 0}};
  const auto f = random_image(32, 1);
  const auto res = apply_bank(f, b);
  ASSERT_EQ(res.responses.size(), 1u);
  const auto plain = smooth_to_scale(f, from_eigen(3, 1.5, 0), b.path).image;
  EXPECT_EQ(res.responses.begin()->second.image.data(), plain.data());
}

TEST(ApplyBank, SmoothingPassesEqualDistinctCovariances) {
  const auto f = random_image(32, 2);
  for (int orders : {1, 3, 6}) {
    BankSpec b;
    b.size_first = 2;
    b.num_sizes = 2;
    b.orders.resize(orders);
    const auto res = apply_bank(f, b);
    // Isotropic entries coincide across orientations: 2 sizes x (1 + 2*6).
    EXPECT_EQ(res.smoothing_passes, 2 * (1 + 2 * 6));
  }
}

TEST(ApplyBank, SkipsInfeasibleEntries) {
  auto b = single(2, 1.0 / 6, 8);
  b.orders = {{1, 0}};
  const auto res = apply_bank(random_image(16, 3), b);
  EXPECT_FALSE(res.skipped.empty());
  EXPECT_EQ(res.responses.size() + res.skipped.size(), 8u);
}

// Rotating the image a quarter turn maps the entry at phi to the entry at
// phi + pi/2; when that wraps past pi the derivative directions flip.
TEST(ApplyBank, QuarterTurnCovariance) {
  const int N = 32;
  const auto f = random_image(N, 4);
  auto b = single(3, 0.5, 6);
  for (auto path : {SmoothingPath::fourier, SmoothingPath::iter3x3}) {
    b.path.path = path;
    const auto base = apply_bank(f, b);
    const auto rot = apply_bank(rotate_quarter_turn(f), b);
    for (const auto& [key, resp] : base.responses) {
      BankKey k2 = key;
      k2.orientation_index = (key.orientation_index + 3) % 6;
      const bool wrapped = key.orientation_index + 3 >= 6;
      const double sign = wrapped && (key.order_m + key.order_n) % 2 ? -1.0 : 1.0;
      const auto expect = rotate_quarter_turn(resp.image);
      const auto& got = rot.responses.at(k2).image;
      for (std::size_t i = 0; i < got.size(); ++i)
        ASSERT_NEAR(got.data()[i], sign * expect.data()[i], 1e-10) << to_string(path);
    }
  }
}

TEST(BankJson, ParsesOverrides) {
  const auto b = bank_from_json(nlohmann::json::parse(R"({
    "size_first": 8, "num_sizes": 2, "num_orientations": 4,
    "orders": [[1, 0], [0, 2]], "path": "iter3x3",
    "norm": {"mode": "variance", "gamma1": 0.5}
  })"));
  EXPECT_EQ(b.size_first, 8);
  EXPECT_EQ(b.num_sizes, 2);
  EXPECT_EQ(b.num_orientations, 4);
  EXPECT_EQ(b.orders.size(), 2u);
  EXPECT_EQ(b.path.path, SmoothingPath::iter3x3);
  EXPECT_EQ(b.norm.mode, NormMode::variance);
  EXPECT_EQ(b.norm.gamma1, 0.5);
  EXPECT_THROW(bank_from_json(nlohmann::json::parse(R"({"path": "wavelet"})")), Error);
}
