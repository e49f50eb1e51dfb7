#pragma once

// The quantitative acceptance suite, shared by `affscale verify` and the
// acceptance test binary. Every check reports its measured value, the
// tolerance it was held to, and wall time against its budget.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affscale/bank.hpp"
#include "affscale/chroma.hpp"
#include "affscale/covariance.hpp"
#include "affscale/derivatives.hpp"
#include "affscale/iterkernel.hpp"
#include "affscale/paths.hpp"
#include "affscale/pyramid.hpp"
#include "affscale/semidiscrete.hpp"

namespace affscale::verify {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
  double wall_ms = 0.0;
  double budget_ms = 0.0;
};

struct Options {
  std::uint64_t seed = 42;
  std::string only;  // empty: all
};

struct Report {
  std::vector<CheckResult> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline RealImage random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealImage img(w, h);
  for (double& v : img.data()) v = u(rng);
  return img;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Each check fills measured / tolerance / detail and returns pass.
using CheckFn = std::function<bool(CheckResult&, std::uint64_t seed)>;

inline bool stencil_exactness(CheckResult& r, std::uint64_t) {
  const auto st = build_stencil(1.0, 0.0, 1.0, 0.5, 0.5);
  const double expect[9] = {1, 2, 1, 2, 4, 2, 1, 2, 1};
  double err = 0.0;
  for (int i = 0; i < 9; ++i) err = std::max(err, std::abs(st.display()[i] - expect[i] / 16.0));
  r.measured = err;
  r.tolerance = 0.0;
  r.detail = stencil_to_text(st);
  for (char& ch : r.detail)
    if (ch == '\n') ch = ' ';
  return err == 0.0;
}

inline bool positivity_boundary(CheckResult& r, std::uint64_t) {
  const double alpha = std::numbers::pi / 8.0;
  int flips = 0;
  double before = 0.0, after = 0.0;
  bool prev = true;
  for (int i = 0; i <= 75; ++i) {
    const double eps = 5.0 + 0.02 * i;
    const bool ok = cxxyy_feasibility(from_eigen(1.0, 1.0 / eps, alpha)).feasible;
    if (i > 0 && ok != prev) {
      ++flips;
      before = eps - 0.02;
      after = eps;
    }
    prev = ok;
  }
  r.measured = 0.5 * (before + after);
  r.tolerance = 0.01;
  std::ostringstream os;
  os << flips << " flip(s), last between " << before << " and " << after
     << " (bound " << max_feasible_eccentricity(alpha) << ")";
  r.detail = os.str();
  return flips == 1 && std::abs(before - 5.82) < 1e-9 && std::abs(after - 5.84) < 1e-9;
}

inline bool fourier_covariance(CheckResult& r, std::uint64_t) {
  const auto spec = from_eigen(4.0, 1.0, std::numbers::pi / 3.0);
  const SemiDiscreteParams p{spec, std::abs(spec.cxy()), 1.0};
  const RealImage k = generate_kernel(p, 256, 256);
  const auto m = kernel_moments(k);
  const double mass_err = std::abs(m.mass - 1.0);
  const double cov_err =
      std::max({rel(m.cxx, spec.cxx()), rel(m.cxy, spec.cxy()), rel(m.cyy, spec.cyy())});
  r.measured = cov_err;
  r.tolerance = 1e-6;
  std::ostringstream os;
  os << "sum error " << mass_err << " (tol 1e-12)";
  r.detail = os.str();
  return mass_err <= 1e-12 && cov_err <= 1e-6;
}

inline bool iter_covariance(CheckResult& r, std::uint64_t) {
  const auto spec = from_eigen(1.0, 0.25, std::numbers::pi / 6.0);
  const auto st = build_stencil(spec.cxx(), spec.cxy(), spec.cyy(), choose_cxxyy_iter(spec), 0.5);
  RealImage k = impulse_image(64, 64, 32, 32);
  for (int i = 0; i < 8; ++i) k = apply_stencil(k, st);
  const auto m = kernel_moments(k);
  const double err = std::max({std::abs(m.cxx - 4.0 * spec.cxx()), std::abs(m.cxy - 4.0 * spec.cxy()),
                               std::abs(m.cyy - 4.0 * spec.cyy())});
  r.measured = err;
  r.tolerance = 1e-10;
  return err <= 1e-10;
}

inline bool semigroup(CheckResult& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const RealImage f = random_image(128, 128, rng);
  const auto shape = from_eigen(1.0, 0.25, std::numbers::pi / 3.0);
  const double c = std::abs(shape.cxy());
  const RealImage two_step = smooth(smooth(f, {shape, c, 0.7}), {shape, c, 1.3});
  const RealImage one_step = smooth(f, {shape, c, 2.0});
  r.measured = max_abs_diff(two_step, one_step);
  r.tolerance = 1e-10;
  return r.measured <= r.tolerance;
}

inline bool non_enhancement(CheckResult& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long violations = 0, extrema = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Stencil3x3 st;
    for (;;) {
      const double l2 = 0.15 + 0.85 * u(rng);
      const auto spec = from_eigen(1.0, l2, std::numbers::pi * u(rng));
      const auto f = cxxyy_feasibility(spec);
      if (!f.feasible) continue;
      const double cxxyy = f.lower + (f.upper - f.lower) * u(rng);
      const double ds = 0.05 + 0.45 * u(rng);
      if (!validate_step(spec, cxxyy, ds).ok) continue;
      st = build_stencil(spec.cxx(), spec.cxy(), spec.cyy(), cxxyy, ds);
      break;
    }
    const RealImage in = random_image(32, 32, rng);
    const RealImage out = apply_stencil(in, st);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const double c = in(x, y);
        bool is_max = true, is_min = true;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const double n = in.periodic(x + dx, y + dy);
            is_max = is_max && n < c;
            is_min = is_min && n > c;
          }
        if (is_max) {
          ++extrema;
          if (out(x, y) > c) ++violations;
        }
        if (is_min) {
          ++extrema;
          if (out(x, y) < c) ++violations;
        }
      }
  }
  r.measured = static_cast<double>(violations);
  r.tolerance = 0.0;
  r.detail = std::to_string(extrema) + " strict extrema checked";
  return violations == 0;
}

/// L1 distance between the K-step iterated kernel and the Fourier kernel of
/// the same total covariance.
inline double path_distance(int K) {
  const auto total = from_eigen(4.0, 1.0, std::numbers::pi / 3.0);
  const auto [shape, s] = normalize(total);
  const double c = std::abs(shape.cxy());
  const RealImage fk = generate_kernel({shape, c, s}, 64, 64);
  const auto st = build_stencil(shape.cxx(), shape.cxy(), shape.cyy(), c, s / K);
  RealImage ik = impulse_image(64, 64, 32, 32);
  for (int i = 0; i < K; ++i) ik = apply_stencil(ik, st);
  return l1_distance(ik, fk);
}

inline bool path_consistency(CheckResult& r, std::uint64_t) {
  const int Ks[] = {4, 8, 16, 32, 64};
  std::vector<double> d;
  for (int K : Ks) d.push_back(path_distance(K));
  bool decreasing = true;
  for (std::size_t i = 1; i < d.size(); ++i) decreasing = decreasing && d[i] < d[i - 1];
  r.measured = d.front() / d.back();
  r.tolerance = 3.0;
  std::ostringstream os;
  os << "L1:";
  for (std::size_t i = 0; i < d.size(); ++i) os << " K=" << Ks[i] << ' ' << d[i];
  r.detail = os.str();
  return decreasing && r.measured >= 3.0;
}

inline bool separability(CheckResult& r, std::uint64_t) {
  const bool a = is_separable(build_stencil(1.0, 0.0, 1.0, 0.5, 0.5));
  const bool b = is_separable(build_stencil(1.0, 0.0, 1.0, 0.25, 0.5));
  r.detail = std::string("gamma=1/2: ") + (a ? "separable" : "not separable") +
             ", gamma=1/4: " + (b ? "separable" : "not separable");
  return a && !b;
}

inline PyramidConfig figure_config(int K) {
  PyramidConfig cfg;
  cfg.K = K;
  cfg.spec = from_eigen(1.0, 0.25, std::numbers::pi / 6.0);
  return cfg;
}

inline bool pyramid_accounting(CheckResult& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 2);
  const RealImage f = random_image(64, 64, rng);
  auto run = [&](int K, int k) {
    const auto cfg = figure_config(K);
    auto levels = build_pyramid(f, cfg, 2);
    return std::make_pair(advance(levels.back(), cfg, k), max_iterations_per_level(cfg));
  };
  const auto [a, gate_a] = run(3, 4);
  const auto [b, gate_b] = run(5, 2);
  r.measured = std::max(std::abs(a.lambda1_scale - 62.0), std::abs(b.lambda1_scale - 66.0));
  r.tolerance = 1e-12;
  std::ostringstream os;
  os << "K=3: lambda1 " << a.lambda1_scale << ", gate " << gate_a << "; K=5: lambda1 "
     << b.lambda1_scale << ", gate " << gate_b;
  r.detail = os.str();
  return r.measured <= r.tolerance && gate_a == 12 && gate_b == 20 && a.level == 2 && b.level == 2;
}

inline bool equivalent_kernel_covariance(CheckResult& r, std::uint64_t) {
  const RealImage k = equivalent_kernel(figure_config(3), 2, 4, 128, 128);
  const auto m = kernel_moments(k);
  const auto e = CovarianceSpec(m.cxx, m.cxy, m.cyy).eigen();
  r.measured = std::max(rel(e.lambda1, 62.0), rel(e.lambda2, 15.5));
  r.tolerance = 1e-6;
  std::ostringstream os;
  os << "eigenvalues " << e.lambda1 << ", " << e.lambda2;
  r.detail = os.str();
  return r.measured <= r.tolerance;
}

inline bool colour_matrix(CheckResult& r, std::uint64_t) {
  const double expect[3][3] = {{1.0 / 3.0, 0.5, 0.5}, {1.0 / 3.0, -0.5, 0.5}, {1.0 / 3.0, 0.0, -1.0}};
  double err = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    RealImage planes[3] = {RealImage(2, 2), RealImage(2, 2), RealImage(2, 2)};
    planes[ch] = constant_image(2, 2, 1.0);
    const auto o = rgb_to_opponent(planes[0], planes[1], planes[2]);
    for (int i = 0; i < 4; ++i) {
      err = std::max(err, std::abs(o.f.data()[i] - expect[ch][0]));
      err = std::max(err, std::abs(o.u.data()[i] - expect[ch][1]));
      err = std::max(err, std::abs(o.v.data()[i] - expect[ch][2]));
    }
  }
  r.measured = err;
  r.tolerance = 0.0;
  return err == 0.0;
}

inline bool lp_convergence(CheckResult& r, std::uint64_t) {
  NormalizationSpec norm;
  norm.mode = NormMode::lp;
  const double scales[] = {4.0, 16.0, 64.0};
  std::vector<double> c;
  for (double s : scales) {
    const CovarianceSpec total(s, 0.0, s);
    const auto op = directional_operator(0.0, 1, 0);
    const RealImage k = derivative_kernel(total, op, PathOptions{});
    c.push_back(lp_norm_factor(k, total, norm, 0.0, 1, 0).correction);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < c.size(); ++i)
    monotone = monotone && std::abs(c[i] - 1.0) < std::abs(c[i - 1] - 1.0);
  r.measured = std::abs(c.back() - 1.0);
  r.tolerance = 0.02;
  std::ostringstream os;
  os << "norm_factor (continuous/discrete):";
  for (std::size_t i = 0; i < c.size(); ++i) os << " s=" << scales[i] << ' ' << c[i];
  r.detail = os.str();
  return monotone && r.measured <= r.tolerance;
}

inline bool smoothing_reuse(CheckResult& r, std::uint64_t seed) {
  std::mt19937_64 rng(seed + 3);
  const RealImage f = random_image(64, 64, rng);
  BankSpec b;
  b.size_first = 4.0;
  b.num_sizes = 1;
  b.num_eccentricities = 1;
  b.num_orientations = 1;
  b.orders = {{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  const auto res = apply_bank(f, b);
  r.measured = res.smoothing_passes;
  r.tolerance = 0.0;
  r.detail = std::to_string(res.responses.size()) + " responses";
  return res.smoothing_passes == 1 && res.responses.size() == 5;
}

struct Criterion {
  int id;
  const char* name;
  double budget_ms;
  CheckFn fn;
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "stencil-exactness", 1.0, stencil_exactness},
      {2, "positivity-boundary", 1000.0, positivity_boundary},
      {3, "fourier-covariance", 5000.0, fourier_covariance},
      {4, "iter3x3-covariance", 1000.0, iter_covariance},
      {5, "semigroup", 2000.0, semigroup},
      {6, "non-enhancement", 10000.0, non_enhancement},
      {7, "path-consistency", 10000.0, path_consistency},
      {8, "separability", 1.0, separability},
      {9, "pyramid-accounting", 1000.0, pyramid_accounting},
      {10, "equivalent-kernel", 10000.0, equivalent_kernel_covariance},
      {11, "colour-matrix", 1.0, colour_matrix},
      {12, "lp-convergence", 30000.0, lp_convergence},
      {13, "smoothing-reuse", 5000.0, smoothing_reuse},
  };
  return list;
}

}  // namespace detail

inline std::vector<std::string> criterion_names() {
  std::vector<std::string> out;
  for (const auto& c : detail::criteria()) out.push_back(c.name);
  return out;
}

/// Runs the suite (or the single criterion named in `only`). A check fails
/// when its tolerance is missed, it throws, or it exceeds its time budget.
inline Report run(const Options& opt = {}) {
  Report rep;
  bool matched = opt.only.empty();
  for (const auto& c : detail::criteria()) {
    if (!opt.only.empty() && opt.only != c.name && opt.only != std::to_string(c.id)) continue;
    matched = true;
    CheckResult r;
    r.id = c.id;
    r.name = c.name;
    r.budget_ms = c.budget_ms;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.fn(r, opt.seed);
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.passed = ok && r.wall_ms <= r.budget_ms;
    if (ok && !r.passed) r.detail += (r.detail.empty() ? "" : "; ") + std::string("over time budget");
    rep.checks.push_back(std::move(r));
  }
  if (!matched) throw Error(ErrorKind::InvalidArgument, "unknown criterion '" + opt.only + "'");
  return rep;
}

inline std::string format_line(const CheckResult& c) {
  std::ostringstream os;
  os << (c.passed ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << "  measured=" << c.measured
     << " tol=" << c.tolerance << "  " << c.wall_ms << " ms (budget " << c.budget_ms << " ms)";
  if (!c.detail.empty()) os << "  " << c.detail;
  return os.str();
}

inline void to_json(nlohmann::json& j, const CheckResult& c) {
  j = nlohmann::json{{"id", c.id},           {"name", c.name},           {"passed", c.passed},
                     {"measured", c.measured}, {"tolerance", c.tolerance}, {"detail", c.detail},
                     {"wall_ms", c.wall_ms},   {"budget_ms", c.budget_ms}};
}

inline void to_json(nlohmann::json& j, const Report& r) {
  j = nlohmann::json{{"checks", r.checks}, {"all_passed", r.all_passed()}};
}

}  // namespace affscale::verify
