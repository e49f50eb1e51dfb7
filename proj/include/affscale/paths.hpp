#pragma once

// Smoothing to a target covariance through one of the three discretizations,
// the matching impulse responses, and normalized derivative responses on top.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <json.hpp>

#include "affscale/covariance.hpp"
#include "affscale/derivatives.hpp"
#include "affscale/error.hpp"
#include "affscale/image.hpp"
#include "affscale/iterkernel.hpp"
#include "affscale/pyramid.hpp"
#include "affscale/semidiscrete.hpp"

namespace affscale {

enum class SmoothingPath { fourier, iter3x3, pyramid };

inline std::string to_string(SmoothingPath p) {
  switch (p) {
    case SmoothingPath::fourier: return "fourier";
    case SmoothingPath::iter3x3: return "iter3x3";
    case SmoothingPath::pyramid: return "pyramid";
  }
  return "fourier";
}

inline SmoothingPath parse_path(const std::string& s) {
  if (s == "fourier") return SmoothingPath::fourier;
  if (s == "iter3x3") return SmoothingPath::iter3x3;
  if (s == "pyramid") return SmoothingPath::pyramid;
  throw Error(ErrorKind::InvalidArgument, "unknown smoothing path '" + s + "'");
}

struct PathOptions {
  SmoothingPath path = SmoothingPath::fourier;
  double delta_s = 0.5;  // iter3x3 and pyramid step size
  int K = 3;             // pyramid
  double rho = 1.0;      // pyramid, reported only
  int max_levels = 16;   // pyramid
  // Cxxyy for the unit shape; NaN picks |Cxy| (fourier) or choose_cxxyy_iter.
  double cxxyy = std::numeric_limits<double>::quiet_NaN();
};

/// Unit shape (lambda_max = 1) and scale s with total = s * shape.
struct ShapeAndScale {
  CovarianceSpec shape;
  double s = 0.0;
};

inline ShapeAndScale split_scale(const CovarianceSpec& total) {
  auto [shape, s] = normalize(total);
  return {shape, s};
}

inline SemiDiscreteParams fourier_params(const CovarianceSpec& total, const PathOptions& o) {
  const auto ss = split_scale(total);
  const double c = std::isnan(o.cxxyy) ? std::abs(ss.shape.cxy()) : o.cxxyy;
  return {ss.shape, c, ss.s};
}

inline PyramidConfig pyramid_config(const CovarianceSpec& total, const PathOptions& o) {
  PyramidConfig cfg;
  cfg.K = o.K;
  cfg.delta_s = o.delta_s;
  cfg.spec = split_scale(total).shape;
  cfg.rho = o.rho;
  cfg.max_levels = o.max_levels;
  cfg.cxxyy = o.cxxyy;
  return cfg;
}

inline IterationPlan iteration_plan(const CovarianceSpec& total, const PathOptions& o) {
  const auto ss = split_scale(total);
  return plan_iterations(ss.shape, ss.s, o.delta_s, o.cxxyy);
}

/// A smoothed field; pyramid output lives on a coarser grid of spacing h.
struct SmoothedField {
  RealImage image;
  int level = 0;
  double spacing_h = 1.0;
};

inline SmoothedField smooth_to_scale(const RealImage& image, const CovarianceSpec& total,
                                     const PathOptions& o) {
  switch (o.path) {
    case SmoothingPath::fourier:
      return {smooth(image, fourier_params(total, o)), 0, 1.0};
    case SmoothingPath::iter3x3:
      return {iterate(image, iteration_plan(total, o)), 0, 1.0};
    case SmoothingPath::pyramid: {
      const auto cfg = pyramid_config(total, o);
      const auto sched =
          schedule_for_scale(cfg, split_scale(total).s, image.width(), image.height());
      auto lv = run_schedule(image, cfg, sched);
      return {std::move(lv.image), lv.level, lv.spacing_h};
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown smoothing path");
}

/// Even grid side large enough that a kernel of this covariance does not wrap.
inline int kernel_grid_side(const CovarianceSpec& total) {
  const int half = static_cast<int>(std::ceil(8.0 * std::sqrt(total.lambda_max()))) + 4;
  return 2 * half;
}

/// Impulse response of smoothing followed by `op` (divided by h^(m+n)), on
/// the full-resolution grid and centred at (W/2, H/2). `image_width` and
/// `image_height` fix the pyramid schedule; zero means the kernel grid.
inline RealImage derivative_kernel(const CovarianceSpec& total, const DirectionalOperator& op,
                                   const PathOptions& o, int image_width = 0,
                                   int image_height = 0) {
  const int n = kernel_grid_side(total);
  switch (o.path) {
    case SmoothingPath::fourier:
      return apply(generate_kernel(fourier_params(total, o), n, n), op, 1.0);
    case SmoothingPath::iter3x3: {
      const RealImage delta = impulse_image(n, n, n / 2, n / 2);
      return apply(iterate(delta, iteration_plan(total, o)), op, 1.0);
    }
    case SmoothingPath::pyramid: {
      const auto cfg = pyramid_config(total, o);
      const auto sched = schedule_for_scale(cfg, split_scale(total).s,
                                            image_width > 0 ? image_width : 1 << 20,
                                            image_height > 0 ? image_height : 1 << 20);
      return expand_all(cfg, sched, op);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown smoothing path");
}

inline RealImage smoothing_kernel(const CovarianceSpec& total, const PathOptions& o) {
  return derivative_kernel(total, directional_operator(0.0, 0, 0), o);
}

struct DerivativeResponse {
  RealImage image;
  int level = 0;
  double spacing_h = 1.0;
  double factor = 1.0;  // normalization multiplier applied
  std::optional<LpNormFactor> lp;
};

/// Normalizes a raw response computed on `field`; the l_p case needs the
/// path's derivative kernel.
inline DerivativeResponse normalize_response(RealImage raw, const SmoothedField& field,
                                             const CovarianceSpec& total,
                                             const DirectionalOperator& op,
                                             const NormalizationSpec& norm, const PathOptions& o,
                                             int image_width, int image_height) {
  DerivativeResponse out;
  out.level = field.level;
  out.spacing_h = field.spacing_h;
  switch (norm.mode) {
    case NormMode::none: break;
    case NormMode::variance:
      out.factor = variance_factor(total, norm, op.order_m, op.order_n);
      break;
    case NormMode::lp: {
      const RealImage k = derivative_kernel(total, op, o, image_width, image_height);
      out.lp = lp_norm_factor(k, total, norm, op.phi, op.order_m, op.order_n);
      out.factor = out.lp->norm_factor;
      break;
    }
  }
  out.image = out.factor == 1.0 ? std::move(raw) : scaled(std::move(raw), out.factor);
  return out;
}

/// Smooth, differentiate and normalize in one call.
inline DerivativeResponse derive(const RealImage& image, const CovarianceSpec& total, double phi,
                                 int order_m, int order_n, const NormalizationSpec& norm,
                                 const PathOptions& o) {
  const auto op = directional_operator(phi, order_m, order_n);
  const SmoothedField field = smooth_to_scale(image, total, o);
  return normalize_response(apply(field.image, op, field.spacing_h), field, total, op, norm, o,
                            image.width(), image.height());
}

inline void to_json(nlohmann::json& j, const PathOptions& o) {
  j = nlohmann::json{{"path", to_string(o.path)}, {"delta_s", o.delta_s}, {"K", o.K},
                     {"rho", o.rho},              {"max_levels", o.max_levels}};
  if (!std::isnan(o.cxxyy)) j["cxxyy"] = o.cxxyy;
}

}  // namespace affscale
