#pragma once

// Affine hybrid pyramids: repeated 3x3 smoothing within a resolution level,
// dyadic subsampling between levels, and the equivalent full-resolution
// kernels of the resulting reduce chains.

#include <cmath>
#include <limits>
#include <vector>

#include <json.hpp>

#include "affscale/covariance.hpp"
#include "affscale/derivatives.hpp"
#include "affscale/error.hpp"
#include "affscale/image.hpp"
#include "affscale/iterkernel.hpp"

namespace affscale {

struct PyramidConfig {
  int K = 3;
  double delta_s = 0.5;
  CovarianceSpec spec;  // normalized to lambda_max = 1
  double rho = 1.0;
  int max_levels = 16;
  bool allow_small_K = false;  // opt out of K > 2
  double cxxyy = std::numeric_limits<double>::quiet_NaN();  // NaN: choose_cxxyy_iter

  double resolved_cxxyy() const { return std::isnan(cxxyy) ? choose_cxxyy_iter(spec) : cxxyy; }
};

inline void validate_config(const PyramidConfig& cfg) {
  require_normalized(cfg.spec);
  if (cfg.K <= 2 && !cfg.allow_small_K) {
    throw Error(ErrorKind::InvalidArgument, "K must exceed 2 (set allow_small_K to override)");
  }
  if (cfg.K < 1) throw Error(ErrorKind::InvalidArgument, "K must be positive");
  if (!(cfg.delta_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_s must be positive");
  if (!(cfg.rho >= 0.0)) throw Error(ErrorKind::InvalidArgument, "rho must be >= 0");
}

/// Per-level stencil shared by reduce and expand cycles.
inline Stencil3x3 level_stencil(const PyramidConfig& cfg, double delta_s) {
  const double cxxyy = cfg.resolved_cxxyy();
  const auto v = validate_step(cfg.spec, cxxyy, delta_s);
  if (!v.ok) throw Error(ErrorKind::InvalidScaleStep, "pyramid scale step fails validation");
  return build_stencil(cfg.spec.cxx(), cfg.spec.cxy(), cfg.spec.cyy(), cxxyy, delta_s);
}

/// Largest k with k * delta_s * lambda_min <= K / 2.
inline int max_iterations_per_level(const PyramidConfig& cfg) {
  require_normalized(cfg.spec);
  const double lmin = cfg.spec.lambda_min();
  if (!(lmin > 0.0)) throw Error(ErrorKind::DegenerateEccentricity, "lambda_min must be positive");
  return static_cast<int>(std::floor(cfg.K / (2.0 * cfg.delta_s * lmin) + 1e-9));
}

inline RealImage subsample(const RealImage& image) {
  if (image.width() % 2 != 0 || image.height() % 2 != 0) {
    throw Error(ErrorKind::OddDimensions, "subsampling needs even dimensions");
  }
  RealImage out(image.width() / 2, image.height() / 2, image.spacing() * 2.0);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) out(c, r) = image(2 * c, 2 * r);
  return out;
}

/// Zero-interleaved upsampling by two.
inline RealImage enlarge(const RealImage& image) {
  RealImage out(image.width() * 2, image.height() * 2, image.spacing() / 2.0);
  for (int r = 0; r < image.height(); ++r)
    for (int c = 0; c < image.width(); ++c) out(2 * c, 2 * r) = image(c, r);
  return out;
}

struct PyramidLevel {
  int level = 0;
  double spacing_h = 1.0;
  RealImage image;
  int iterations_done = 0;
  double accumulated_s = 0.0;  // in original-grid units, times the unit shape
  double lambda1_scale = 0.0;  // accumulated_s * lambda_max
  double lambda2_scale = 0.0;  // accumulated_s * lambda_min

  void add_scale(const PyramidConfig& cfg, double ds) {
    accumulated_s += ds;
    lambda1_scale += ds * cfg.spec.lambda_max();
    lambda2_scale += ds * cfg.spec.lambda_min();
  }
};

inline PyramidLevel base_level(const RealImage& image) {
  PyramidLevel lv;
  lv.image = image;
  lv.image.set_spacing(1.0);
  return lv;
}

/// Runs `steps` further iterations at the current level.
inline PyramidLevel advance(PyramidLevel lv, const PyramidConfig& cfg, int steps) {
  validate_config(cfg);
  if (steps < 0 || lv.iterations_done + steps > max_iterations_per_level(cfg)) {
    throw Error(ErrorKind::UnreachableTarget, "iteration count exceeds the per-level gate");
  }
  if (steps == 0) return lv;
  const Stencil3x3 st = level_stencil(cfg, cfg.delta_s);
  for (int i = 0; i < steps; ++i) lv.image = apply_stencil(lv.image, st);
  lv.iterations_done += steps;
  lv.add_scale(cfg, steps * lv.spacing_h * lv.spacing_h * cfg.delta_s);
  return lv;
}

inline PyramidLevel complete_level(PyramidLevel lv, const PyramidConfig& cfg) {
  const int steps = max_iterations_per_level(cfg) - lv.iterations_done;
  return advance(std::move(lv), cfg, steps);
}

/// Finishes the gated iterations of a level, then subsamples by two.
inline PyramidLevel reduce_cycle(const PyramidLevel& lv, const PyramidConfig& cfg) {
  if (lv.image.width() % 2 != 0 || lv.image.height() % 2 != 0) {
    throw Error(ErrorKind::OddDimensions, "level dimensions must be even to reduce");
  }
  PyramidLevel done = complete_level(lv, cfg);
  PyramidLevel next;
  next.level = done.level + 1;
  next.spacing_h = done.spacing_h * 2.0;
  next.image = subsample(done.image);
  next.iterations_done = 0;
  next.accumulated_s = done.accumulated_s;
  next.lambda1_scale = done.lambda1_scale;
  next.lambda2_scale = done.lambda2_scale;
  return next;
}

/// Levels 0..num_levels-1 in their completed state (k at the gate) followed
/// by level num_levels right after subsampling (k = 0).
inline std::vector<PyramidLevel> build_pyramid(const RealImage& image, const PyramidConfig& cfg,
                                               int num_levels) {
  validate_config(cfg);
  if (num_levels < 0 || num_levels > cfg.max_levels) {
    throw Error(ErrorKind::InvalidArgument, "num_levels out of range");
  }
  const int div = 1 << num_levels;
  if (image.width() % div != 0 || image.height() % div != 0) {
    throw Error(ErrorKind::DimensionNotDivisible, "image dimensions must be divisible by 2^levels");
  }
  std::vector<PyramidLevel> out;
  PyramidLevel cur = base_level(image);
  for (int l = 0; l < num_levels; ++l) {
    PyramidLevel done = complete_level(cur, cfg);
    out.push_back(done);
    cur = reduce_cycle(done, cfg);
  }
  out.push_back(cur);
  return out;
}

/// Largest power of two not exceeding rho * sqrt(s) * sqrt(lambda_min);
/// one when that bound is below one.
inline double subsampling_gate(double total_s, const CovarianceSpec& spec, double rho) {
  if (!(total_s >= 0.0) || !(rho >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "total_s and rho must be >= 0");
  }
  const double h_max = rho * std::sqrt(total_s) * std::sqrt(spec.lambda_min());
  if (h_max < 1.0) return 1.0;
  double h = 1.0;
  while (h * 2.0 <= h_max) h *= 2.0;
  return h;
}

// ---------------------------------------------------------------------------
// Schedules: the sequence of (level, full steps, residual step) a reduce
// chain runs through. Smoothing and equivalent kernels both follow one.

struct LevelSteps {
  int level = 0;
  int steps = 0;
  double residual_ds = 0.0;  // extra step size in level units, 0 for none
};

struct PyramidSchedule {
  std::vector<LevelSteps> levels;

  int final_level() const { return levels.empty() ? 0 : levels.back().level; }
  double final_spacing() const { return std::ldexp(1.0, final_level()); }
};

/// Schedule reaching (target_l, target_k) through fully completed levels.
inline PyramidSchedule schedule_to(const PyramidConfig& cfg, int target_l, int target_k) {
  validate_config(cfg);
  const int kmax = max_iterations_per_level(cfg);
  if (target_l < 0 || target_l > cfg.max_levels || target_k < 0 || target_k > kmax) {
    throw Error(ErrorKind::UnreachableTarget, "target (l, k) not reachable under this config");
  }
  PyramidSchedule s;
  for (int l = 0; l < target_l; ++l) s.levels.push_back({l, kmax, 0.0});
  s.levels.push_back({target_l, target_k, 0.0});
  return s;
}

/// Schedule accumulating `total_s` for an image of the given size. Levels are
/// abandoned for the next coarser one when their gate is reached and the
/// image can still be halved (even, at least 8 samples per side, below
/// max_levels); otherwise iteration continues at the current level. The last
/// level ends with a residual step when total_s is not on the step lattice.
inline PyramidSchedule schedule_for_scale(const PyramidConfig& cfg, double total_s, int width,
                                          int height) {
  validate_config(cfg);
  if (!(total_s >= 0.0)) throw Error(ErrorKind::InvalidArgument, "total_s must be >= 0");
  const int kmax = max_iterations_per_level(cfg);
  PyramidSchedule s;
  double acc = 0.0;
  int l = 0, w = width, h = height;
  for (;;) {
    const double hh = std::ldexp(1.0, 2 * l);
    const double per_step = hh * cfg.delta_s;
    const bool can_halve = l < cfg.max_levels && w % 2 == 0 && h % 2 == 0 && w >= 8 && h >= 8;
    const double remaining = total_s - acc;
    const double eps = 1e-12 * std::max(1.0, total_s);
    const int limit = can_halve ? kmax : std::numeric_limits<int>::max();
    if (remaining <= static_cast<double>(limit) * per_step + eps) {
      int k = static_cast<int>(std::floor(remaining / per_step + 1e-12));
      double residual = (remaining - k * per_step) / hh;
      if (residual <= eps / hh) residual = 0.0;
      s.levels.push_back({l, k, residual});
      return s;
    }
    s.levels.push_back({l, kmax, 0.0});
    acc += kmax * per_step;
    ++l;
    w /= 2;
    h /= 2;
  }
}

/// Runs a schedule on an image; returns the final level state.
inline PyramidLevel run_schedule(const RealImage& image, const PyramidConfig& cfg,
                                 const PyramidSchedule& sched) {
  validate_config(cfg);
  const Stencil3x3 full = level_stencil(cfg, cfg.delta_s);
  PyramidLevel lv = base_level(image);
  for (std::size_t i = 0; i < sched.levels.size(); ++i) {
    const auto& ls = sched.levels[i];
    if (ls.level != lv.level) throw Error(ErrorKind::InvalidArgument, "schedule levels out of order");
    for (int k = 0; k < ls.steps; ++k) lv.image = apply_stencil(lv.image, full);
    lv.iterations_done = ls.steps;
    lv.add_scale(cfg, ls.steps * lv.spacing_h * lv.spacing_h * cfg.delta_s);
    if (ls.residual_ds > 0.0) {
      lv.image = apply_stencil(lv.image, level_stencil(cfg, ls.residual_ds));
      lv.add_scale(cfg, lv.spacing_h * lv.spacing_h * ls.residual_ds);
    }
    if (i + 1 < sched.levels.size()) {
      lv.image = subsample(lv.image);
      lv.level += 1;
      lv.spacing_h *= 2.0;
      lv.iterations_done = 0;
    }
  }
  return lv;
}

/// Total smoothing (original-grid units, times the unit shape) of a schedule.
inline double schedule_scale(const PyramidConfig& cfg, const PyramidSchedule& sched) {
  double acc = 0.0;
  for (const auto& ls : sched.levels) {
    const double hh = std::ldexp(1.0, 2 * ls.level);
    acc += hh * (ls.steps * cfg.delta_s + ls.residual_ds);
  }
  return acc;
}

/// Spatial reach of a schedule's equivalent kernel in full-resolution samples.
inline int schedule_support(const PyramidSchedule& sched, int mask_radius) {
  int r = 0;
  for (const auto& ls : sched.levels)
    r += (ls.steps + (ls.residual_ds > 0.0 ? 1 : 0)) * (1 << ls.level);
  return r + mask_radius * (1 << sched.final_level());
}

/// Expand-all of the impulse response of `op` placed at the final level of
/// the schedule, divided by h^(m+n). Result is centred at (W/2, H/2). Zero
/// width/height picks a grid large enough to avoid wrap-around.
inline RealImage expand_all(const PyramidConfig& cfg, const PyramidSchedule& sched,
                            const DirectionalOperator& op, int width = 0, int height = 0) {
  validate_config(cfg);
  const int L = sched.final_level();
  const int unit = 1 << L;
  if (width <= 0 || height <= 0) {
    const int reach = schedule_support(sched, op.mask.radius());
    const int n = ((2 * reach + 2 + unit - 1) / unit) * unit;
    width = height = std::max(n, 4 * unit);
  }
  if (width % unit != 0 || height % unit != 0) {
    throw Error(ErrorKind::DimensionNotDivisible, "kernel grid must be divisible by 2^level");
  }
  const Stencil3x3 full = level_stencil(cfg, cfg.delta_s);
  RealImage cur = impulse_image(width / unit, height / unit, 0, 0, std::ldexp(1.0, L));
  cur = apply_mask(cur, op.mask);
  for (auto it = sched.levels.rbegin(); it != sched.levels.rend(); ++it) {
    if (it != sched.levels.rbegin()) cur = enlarge(cur);
    if (it->residual_ds > 0.0) cur = apply_stencil(cur, level_stencil(cfg, it->residual_ds));
    for (int k = 0; k < it->steps; ++k) cur = apply_stencil(cur, full);
  }
  const double k = 1.0 / std::pow(std::ldexp(1.0, L), op.order());
  for (double& v : cur.data()) v *= k;
  cur.set_spacing(1.0);
  return circular_shift(cur, width / 2, height / 2);
}

/// Equivalent convolution kernel of level l after k iterations.
inline RealImage equivalent_kernel(const PyramidConfig& cfg, int target_l, int target_k,
                                   int width = 0, int height = 0) {
  return expand_all(cfg, schedule_to(cfg, target_l, target_k), directional_operator(0.0, 0, 0),
                    width, height);
}

/// Equivalent derivative approximation kernel at (l, k).
inline RealImage equivalent_derivative_kernel(const PyramidConfig& cfg, int target_l, int target_k,
                                              double phi, int order_m, int order_n,
                                              int width = 0, int height = 0) {
  return expand_all(cfg, schedule_to(cfg, target_l, target_k),
                    directional_operator(phi, order_m, order_n), width, height);
}

inline void to_json(nlohmann::json& j, const PyramidLevel& lv) {
  j = nlohmann::json{{"l", lv.level},
                     {"h", lv.spacing_h},
                     {"k", lv.iterations_done},
                     {"width", lv.image.width()},
                     {"height", lv.image.height()},
                     {"accumulated_s", lv.accumulated_s},
                     {"lambda1_scale", lv.lambda1_scale},
                     {"lambda2_scale", lv.lambda2_scale}};
}

inline void to_json(nlohmann::json& j, const PyramidConfig& c) {
  j = nlohmann::json{{"K", c.K},         {"delta_s", c.delta_s},
                     {"spec", c.spec},   {"rho", c.rho},
                     {"max_levels", c.max_levels}, {"cxxyy", c.resolved_cxxyy()}};
}

}  // namespace affscale
