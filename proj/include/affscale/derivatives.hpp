#pragma once

// Discrete difference operators, directional derivative approximations and
// scale normalization of their responses.

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "affscale/covariance.hpp"
#include "affscale/error.hpp"
#include "affscale/image.hpp"
#include "affscale/reference.hpp"

namespace affscale {

/// Square mask in correlation form: (M f)(x) = sum w(d) f(x + d), with d
/// measured in the y-up frame.
class Mask {
 public:
  explicit Mask(int radius = 0) : radius_(radius), w_((2 * radius + 1) * (2 * radius + 1), 0.0) {}

  int radius() const noexcept { return radius_; }
  int side() const noexcept { return 2 * radius_ + 1; }

  double& at(int dx, int dy) { return w_[(radius_ - dy) * side() + (dx + radius_)]; }
  double at(int dx, int dy) const { return w_[(radius_ - dy) * side() + (dx + radius_)]; }

  /// Row-major with the top row at dy = +radius.
  const std::vector<double>& display() const noexcept { return w_; }

  double sum() const {
    double s = 0.0;
    for (double v : w_) s += v;
    return s;
  }

  Mask& operator+=(const Mask& o) {
    if (o.radius_ > radius_) *this = padded(o.radius_);
    const Mask src = o.padded(radius_);
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] += src.w_[i];
    return *this;
  }
  friend Mask operator*(double k, Mask m) {
    for (double& v : m.w_) v *= k;
    return m;
  }
  friend Mask operator+(Mask a, const Mask& b) { return a += b; }

  Mask padded(int radius) const {
    Mask out(std::max(radius, radius_));
    for (int dy = -radius_; dy <= radius_; ++dy)
      for (int dx = -radius_; dx <= radius_; ++dx) out.at(dx, dy) = at(dx, dy);
    return out;
  }

 private:
  int radius_;
  std::vector<double> w_;
};

/// Composition a after b: the mask of f -> a(b(f)).
inline Mask compose(const Mask& a, const Mask& b) {
  Mask out(a.radius() + b.radius());
  for (int ay = -a.radius(); ay <= a.radius(); ++ay)
    for (int ax = -a.radius(); ax <= a.radius(); ++ax)
      for (int by = -b.radius(); by <= b.radius(); ++by)
        for (int bx = -b.radius(); bx <= b.radius(); ++bx)
          out.at(ax + bx, ay + by) += a.at(ax, ay) * b.at(bx, by);
  return out;
}

inline Mask identity_mask() {
  Mask m(0);
  m.at(0, 0) = 1.0;
  return m;
}

struct DifferenceMasks {
  Mask dx, dy, dxx, dyy, dxy, dxxyy;
};

/// delta_x = (-1/2, 0, 1/2), delta_xx = (1, -2, 1) and their products.
inline DifferenceMasks central_difference_masks() {
  DifferenceMasks d{Mask(1), Mask(1), Mask(1), Mask(1), Mask(1), Mask(1)};
  d.dx.at(1, 0) = 0.5;
  d.dx.at(-1, 0) = -0.5;
  d.dy.at(0, 1) = 0.5;
  d.dy.at(0, -1) = -0.5;
  d.dxx.at(-1, 0) = d.dxx.at(1, 0) = 1.0;
  d.dxx.at(0, 0) = -2.0;
  d.dyy.at(0, -1) = d.dyy.at(0, 1) = 1.0;
  d.dyy.at(0, 0) = -2.0;
  d.dxy = compose(d.dx, d.dy);
  d.dxxyy = compose(d.dxx, d.dyy);
  return d;
}

struct DirectionalOperator {
  double phi = 0.0;
  int order_m = 0;
  int order_n = 0;
  Mask mask = identity_mask();

  int order() const { return order_m + order_n; }
};

/// delta_phi^m delta_perp^n for m + n <= 2, with v = (cos phi, sin phi) and
/// perp = (-sin phi, cos phi). Second-order operators use the 3x3
/// primitives delta_xx, delta_xy, delta_yy.
inline DirectionalOperator directional_operator(double phi, int order_m, int order_n) {
  check_order(order_m, order_n);
  const auto d = central_difference_masks();
  const double c = std::cos(phi), s = std::sin(phi);
  DirectionalOperator op{phi, order_m, order_n, identity_mask()};
  switch (order_m * 3 + order_n) {
    case 0: break;
    case 3: op.mask = c * d.dx + s * d.dy; break;
    case 1: op.mask = -s * d.dx + c * d.dy; break;
    case 6: op.mask = c * c * d.dxx + 2.0 * c * s * d.dxy + s * s * d.dyy; break;
    case 4: op.mask = -c * s * d.dxx + (c * c - s * s) * d.dxy + c * s * d.dyy; break;
    case 2: op.mask = s * s * d.dxx + (-2.0 * c * s) * d.dxy + c * c * d.dyy; break;
    default: break;
  }
  return op;
}

/// Periodic correlation with a mask.
inline RealImage apply_mask(const RealImage& image, const Mask& mask) {
  const int W = image.width(), H = image.height(), R = mask.radius();
  RealImage out(W, H, image.spacing());
  parallel_rows(H, [&](int r) {
    for (int c = 0; c < W; ++c) {
      double acc = 0.0;
      for (int dy = -R; dy <= R; ++dy) {
        const int rr = wrap(r - dy, H);
        for (int dx = -R; dx <= R; ++dx) {
          const double w = mask.at(dx, dy);
          if (w != 0.0) acc += w * image(wrap(c + dx, W), rr);
        }
      }
      out(c, r) = acc;
    }
  });
  return out;
}

/// Derivative approximation in units of the original grid: the mask response
/// divided by h^(m+n).
inline RealImage apply(const RealImage& image, const DirectionalOperator& op, double spacing_h) {
  RealImage out = apply_mask(image, op.mask);
  const double k = 1.0 / std::pow(spacing_h, op.order());
  if (k != 1.0)
    for (double& v : out.data()) v *= k;
  return out;
}

inline RealImage apply(const RealImage& image, const DirectionalOperator& op) {
  return apply(image, op, image.spacing());
}

enum class NormMode { none, variance, lp };

struct NormalizationSpec {
  double gamma1 = 1.0;
  double gamma2 = 1.0;
  NormMode mode = NormMode::none;
  double p = 1.0;
};

inline double variance_factor(const CovarianceSpec& spec, const NormalizationSpec& norm,
                              int order_m, int order_n) {
  const auto e = spec.eigen();
  return std::pow(e.lambda1, order_m * norm.gamma1 / 2.0) *
         std::pow(e.lambda2, order_n * norm.gamma2 / 2.0);
}

inline RealImage scaled(RealImage img, double k) {
  for (double& v : img.data()) v *= k;
  return img;
}

inline RealImage variance_normalize(const RealImage& response, const CovarianceSpec& spec,
                                    const NormalizationSpec& norm, int order_m, int order_n) {
  return scaled(response, variance_factor(spec, norm, order_m, order_n));
}

/// Pieces of the l_p normalization. `factor` multiplies the raw response so
/// that the discrete kernel norm matches the scale-normalized continuous one;
/// `correction` = continuous / discrete is the part beyond variance
/// normalization (the usual name for the whole factor clashes with the
/// kernel orientation, hence norm_factor here).
struct LpNormFactor {
  double variance = 1.0;
  double continuous_norm = 0.0;
  double discrete_norm = 0.0;
  double correction = 1.0;
  double norm_factor = 1.0;
};

inline double discrete_lp_norm(const RealImage& kernel, double p) {
  double acc = 0.0;
  for (double v : kernel.data()) acc += std::pow(std::abs(v), p);
  return std::pow(acc, 1.0 / p);
}

/// `derivative_kernel` is the impulse response of smoothing followed by the
/// directional operator, already divided by h^(m+n); `spec` is the total
/// covariance of the smoothing.
inline LpNormFactor lp_norm_factor(const RealImage& derivative_kernel, const CovarianceSpec& spec,
                                   const NormalizationSpec& norm, double phi, int order_m,
                                   int order_n) {
  if (!(norm.p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  LpNormFactor f;
  f.variance = variance_factor(spec, norm, order_m, order_n);
  f.discrete_norm = discrete_lp_norm(derivative_kernel, norm.p);
  if (!(f.discrete_norm > 0.0)) {
    throw Error(ErrorKind::ZeroDiscreteNorm, "discrete derivative kernel has zero norm");
  }
  f.continuous_norm = lp_norm_continuous(spec, phi, order_m, order_n, norm.p);
  f.correction = f.continuous_norm / f.discrete_norm;
  f.norm_factor = f.variance * f.correction;
  return f;
}

inline RealImage lp_normalize(const RealImage& response, const RealImage& derivative_kernel,
                              const CovarianceSpec& spec, const NormalizationSpec& norm,
                              double phi, int order_m, int order_n) {
  return scaled(response,
                lp_norm_factor(derivative_kernel, spec, norm, phi, order_m, order_n).norm_factor);
}

inline void to_json(nlohmann::json& j, const Mask& m) {
  j = nlohmann::json{{"radius", m.radius()}, {"weights", m.display()}};
}

inline void to_json(nlohmann::json& j, const DirectionalOperator& op) {
  j = nlohmann::json{{"phi", op.phi}, {"order", {op.order_m, op.order_n}}, {"mask", op.mask}};
}

inline void to_json(nlohmann::json& j, const LpNormFactor& f) {
  j = nlohmann::json{{"variance", f.variance},
                     {"continuous_norm", f.continuous_norm},
                     {"discrete_norm", f.discrete_norm},
                     {"correction", f.correction},
                     {"norm_factor", f.norm_factor}};
}

inline std::string to_string(NormMode m) {
  switch (m) {
    case NormMode::none: return "none";
    case NormMode::variance: return "variance";
    case NormMode::lp: return "lp";
  }
  return "none";
}

}  // namespace affscale
