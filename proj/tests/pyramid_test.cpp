#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "affscale/paths.hpp"
#include "affscale/pyramid.hpp"

using namespace affscale;
constexpr double pi = std::numbers::pi;

namespace {

RealImage random_image(int w, int h, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  RealImage img(w, h);
  for (double& v : img.data()) v = u(rng);
  return img;
}

PyramidConfig config(int K, double ratio = 0.25, double alpha = pi / 6) {
  PyramidConfig c;
  c.K = K;
  c.spec = from_eigen(1, ratio, alpha);
  return c;
}

// Hand recurrence for the accumulated lambda_1 scale of (l, k).
double expected_lambda1(int kmax, int l, int k, double ds) {
  double s = 0;
  for (int j = 0; j < l; ++j) s += kmax * ds * std::pow(4.0, j);
  return s + k * ds * std::pow(4.0, l);
}

}  // namespace

TEST(Subsample, Examples) {
  const auto c = subsample(constant_image(4, 4, 2.0));
  EXPECT_EQ(c.width(), 2);
  for (double v : c.data()) EXPECT_EQ(v, 2.0);
  EXPECT_EQ(c.spacing(), 2.0);
  const auto a = subsample(impulse_image(4, 4, 0, 0));
  EXPECT_EQ(a(0, 0), 1.0);
  EXPECT_EQ(sum(subsample(impulse_image(4, 4, 1, 1))), 0.0);
  EXPECT_THROW(subsample(RealImage(5, 4)), Error);
}

TEST(Enlarge, Examples) {
  const auto f = random_image(6, 4, 1);
  EXPECT_EQ(subsample(enlarge(f)).data(), f.data());
  EXPECT_NEAR(sum(enlarge(f)), sum(f), 1e-13);
  const auto e = enlarge(impulse_image(2, 2, 1, 1));
  EXPECT_EQ(e.width(), 4);
  EXPECT_EQ(e(2, 2), 1.0);
  EXPECT_EQ(sum(e), 1.0);
}

TEST(Gate, Examples) {
  EXPECT_EQ(max_iterations_per_level(config(3)), 12);
  EXPECT_EQ(max_iterations_per_level(config(5)), 20);
  EXPECT_EQ(max_iterations_per_level(config(3, 1.0)), 3);
}

TEST(Gate, Monotone) {
  int prev = 1 << 30;
  for (double l2 = 0.2; l2 <= 1.0; l2 += 0.05) {
    const int k = max_iterations_per_level(config(3, l2, 0.0));
    EXPECT_LE(k, prev);
    prev = k;
  }
  int prevK = 0;
  for (int K = 3; K < 10; ++K) {
    const int k = max_iterations_per_level(config(K));
    EXPECT_GE(k, prevK);
    prevK = k;
  }
}

TEST(Config, SmallKNeedsOptOut) {
  auto c = config(2);
  EXPECT_THROW(validate_config(c), Error);
  c.allow_small_K = true;
  EXPECT_NO_THROW(validate_config(c));
  auto u = config(3);
  u.spec = CovarianceSpec(2, 0, 1);
  EXPECT_THROW(validate_config(u), Error);
}

TEST(ReduceCycle, FigureScaleAccounting) {
  const auto f = random_image(64, 64, 2);
  for (auto [K, k, expect] : {std::tuple{3, 4, 62.0}, {5, 2, 66.0}}) {
    const auto cfg = config(K);
    auto lv = base_level(f);
    lv = reduce_cycle(lv, cfg);
    lv = reduce_cycle(lv, cfg);
    lv = advance(lv, cfg, k);
    EXPECT_EQ(lv.level, 2);
    EXPECT_EQ(lv.spacing_h, 4.0);
    EXPECT_EQ(lv.iterations_done, k);
    EXPECT_EQ(lv.lambda1_scale, expect);
    EXPECT_NEAR(lv.lambda2_scale, expect / 4, 1e-12);
    EXPECT_EQ(lv.lambda1_scale, expected_lambda1(max_iterations_per_level(cfg), 2, k, 0.5));
  }
}

TEST(ReduceCycle, ConstantStaysConstant) {
  const auto lv = reduce_cycle(base_level(constant_image(16, 16, 0.6)), config(3));
  EXPECT_EQ(lv.image.width(), 8);
  for (double v : lv.image.data()) EXPECT_NEAR(v, 0.6, 1e-14);
}

TEST(ReduceCycle, LevelMeanMatchesSmoothedSamples) {
  const auto f = random_image(32, 32, 3);
  const auto cfg = config(3);
  const auto done = complete_level(base_level(f), cfg);
  const auto next = reduce_cycle(base_level(f), cfg);
  double kept = 0;
  for (int r = 0; r < 32; r += 2)
    for (int c = 0; c < 32; c += 2) kept += done.image(c, r);
  EXPECT_NEAR(mean(next.image), kept / 256, 1e-14);
  EXPECT_NEAR(mean(done.image), mean(f), 1e-14);
}

TEST(BuildPyramid, Levels) {
  const auto f = random_image(256, 256, 4);
  const auto levels = build_pyramid(f, config(3), 3);
  ASSERT_EQ(levels.size(), 4u);
  for (int l = 0; l < 3; ++l) {
    EXPECT_EQ(levels[l].level, l);
    EXPECT_EQ(levels[l].iterations_done, 12);
    EXPECT_EQ(levels[l].spacing_h, std::ldexp(1.0, l));
    EXPECT_EQ(levels[l].image.width(), 256 >> l);
  }
  EXPECT_EQ(levels[3].iterations_done, 0);
  EXPECT_EQ(levels[3].image.width(), 32);
  const auto echo = build_pyramid(f, config(3), 0);
  ASSERT_EQ(echo.size(), 1u);
  EXPECT_EQ(echo[0].image.data(), f.data());
  EXPECT_THROW(build_pyramid(RealImage(12, 12), config(3), 3), Error);
}

TEST(BuildPyramid, ConstantEveryLevel) {
  for (const auto& lv : build_pyramid(constant_image(32, 32, 1.5), config(3), 3))
    for (double v : lv.image.data()) EXPECT_NEAR(v, 1.5, 1e-13);
}

TEST(EquivalentKernel, Trivial) {
  const auto cfg = config(3);
  const auto d = equivalent_kernel(cfg, 0, 0, 8, 8);
  EXPECT_EQ(d(4, 4), 1.0);
  EXPECT_EQ(sum(d), 1.0);
  const auto one = equivalent_kernel(cfg, 0, 1, 8, 8);
  const auto st = level_stencil(cfg, 0.5);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) EXPECT_EQ(one(4 + dx, 4 - dy), st.at(dx, dy));
  EXPECT_THROW(equivalent_kernel(cfg, 0, 13), Error);
}

TEST(EquivalentKernel, CovarianceEqualsAccumulated) {
  for (auto [K, l, k] : {std::tuple{3, 2, 4}, {5, 2, 2}, {3, 1, 7}, {4, 3, 0}}) {
    const auto cfg = config(K);
    const auto kern = equivalent_kernel(cfg, l, k);
    const auto m = kernel_moments(kern);
    const double s = expected_lambda1(max_iterations_per_level(cfg), l, k, 0.5);
    EXPECT_NEAR(m.mass, 1.0, 1e-12);
    EXPECT_NEAR(m.cxx, s * cfg.spec.cxx(), 1e-8);
    EXPECT_NEAR(m.cxy, s * cfg.spec.cxy(), 1e-8);
    EXPECT_NEAR(m.cyy, s * cfg.spec.cyy(), 1e-8);
    EXPECT_GE(min_value(kern), -1e-15);
  }
}

TEST(EquivalentKernel, MatchesPyramidOnImpulses) {
  // Pushing a delta at full resolution through the chain and reading the
  // level-2 sample at the origin gives the kernel value at the origin
  // offset; every shifted delta reads one kernel value.
  const auto cfg = config(3);
  const auto kern = equivalent_kernel(cfg, 2, 4, 128, 128);
  for (auto [dx, dy] : {std::pair{0, 0}, {3, -5}, {-11, 7}, {20, 2}}) {
    auto lv = base_level(impulse_image(128, 128, wrap(dx, 128), wrap(-dy, 128)));
    lv = reduce_cycle(lv, cfg);
    lv = reduce_cycle(lv, cfg);
    lv = advance(lv, cfg, 4);
    // output(0) = sum_x kappa(0 - x) f(x) = kappa(-dx, -dy)
    EXPECT_NEAR(lv.image(0, 0), kern(64 - dx, 64 + dy), 1e-15);
  }
}

TEST(EquivalentDerivativeKernel, Properties) {
  const auto cfg = config(3);
  const auto k0 = equivalent_derivative_kernel(cfg, 1, 3, 0.4, 0, 0, 64, 64);
  EXPECT_EQ(k0.data(), equivalent_kernel(cfg, 1, 3, 64, 64).data());
  for (auto [m, n] : {std::pair{1, 0}, {0, 1}}) {
    EXPECT_NEAR(sum(equivalent_derivative_kernel(cfg, 2, 4, 0.4, m, n)), 0.0, 1e-12);
  }
  // h = 4 at level 2: the mask response is divided by 4.
  const auto cfg1 = config(3, 1.0, 0.0);
  const auto raw = expand_all(cfg1, schedule_to(cfg1, 2, 0), directional_operator(0, 1, 0), 32, 32);
  const auto delta = expand_all(cfg1, schedule_to(cfg1, 2, 0), directional_operator(0, 0, 0), 32, 32);
  EXPECT_NEAR(sum(delta), 1.0, 1e-15);
  double first_moment = 0;
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) first_moment += (c - 16) * raw(c, r);
  // Impulse response of a unit-slope derivative has first moment -1.
  EXPECT_NEAR(first_moment, -1.0, 1e-12);
}

TEST(SubsamplingGate, Examples) {
  EXPECT_EQ(subsampling_gate(100.0, CovarianceSpec(), 0.0), 1.0);
  EXPECT_EQ(subsampling_gate(64.0, CovarianceSpec(), 1.0), 8.0);
  EXPECT_EQ(subsampling_gate(10.0, from_eigen(1, 0.25, 0.3), 1.0), 1.0);
  EXPECT_EQ(subsampling_gate(63.0, CovarianceSpec(), 1.0), 4.0);
}

TEST(Schedule, ReachesTargetScale) {
  const auto cfg = config(3);
  for (double s : {0.0, 0.3, 6.0, 17.25, 62.0, 100.0}) {
    const auto sched = schedule_for_scale(cfg, s, 256, 256);
    EXPECT_NEAR(schedule_scale(cfg, sched), s, 1e-12) << s;
  }
  // Small images stop subsampling and keep iterating.
  const auto small = schedule_for_scale(cfg, 200.0, 16, 16);
  EXPECT_EQ(small.final_level(), 2);
  EXPECT_NEAR(schedule_scale(cfg, small), 200.0, 1e-10);
}

TEST(Schedule, PyramidPathKernelMatchesSmoothing) {
  const auto total = from_eigen(40, 10, 0.5);
  PathOptions o;
  o.path = SmoothingPath::pyramid;
  const auto f = random_image(64, 64, 5);
  const auto field = smooth_to_scale(f, total, o);
  const auto kern = derivative_kernel(total, directional_operator(0, 0, 0), o, 64, 64);
  const auto m = kernel_moments(kern);
  EXPECT_NEAR(m.cxx, total.cxx(), 1e-8);
  EXPECT_NEAR(m.cxy, total.cxy(), 1e-8);
  EXPECT_NEAR(m.cyy, total.cyy(), 1e-8);
  EXPECT_EQ(field.spacing_h, std::ldexp(1.0, field.level));
  EXPECT_GT(field.level, 0);
}
