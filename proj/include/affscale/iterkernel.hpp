#pragma once

// Fully discrete scale stepping: Euler forward steps of the semi-discrete
// affine diffusion equation realized as a 3x3 computational molecule.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/SVD>
#include <json.hpp>

#include "affscale/covariance.hpp"
#include "affscale/error.hpp"
#include "affscale/image.hpp"

namespace affscale {

/// Second moments of a kernel or stencil; unlike CovarianceSpec it may be
/// zero or indefinite.
struct SecondMoments {
  double cxx = 0.0;
  double cxy = 0.0;
  double cyy = 0.0;
};

/// Nine forward-iteration coefficients. Row-major display order: the top row
/// holds dy = +1, the left column dx = -1.
class Stencil3x3 {
 public:
  struct Meta {
    double cxx = 0.0, cxy = 0.0, cyy = 0.0, cxxyy = 0.0, delta_s = 0.0;
  };

  Stencil3x3() { coeffs_.fill(0.0); coeffs_[4] = 1.0; }
  explicit Stencil3x3(const std::array<double, 9>& display_order) : coeffs_(display_order) {}
  Stencil3x3(const std::array<double, 9>& display_order, Meta meta)
      : coeffs_(display_order), meta_(meta) {}

  double at(int dx, int dy) const { return coeffs_[(1 - dy) * 3 + (dx + 1)]; }
  const std::array<double, 9>& display() const noexcept { return coeffs_; }
  const Meta& meta() const noexcept { return meta_; }

  double sum() const {
    double s = 0.0;
    for (double c : coeffs_) s += c;
    return s;
  }
  double min_coefficient() const { return *std::min_element(coeffs_.begin(), coeffs_.end()); }

 private:
  std::array<double, 9> coeffs_;
  Meta meta_;
};

inline Stencil3x3 identity_stencil() { return Stencil3x3(); }

/// Builds k(Cxx, Cxy, Cyy, Cxxyy, delta_s). The centre is one minus the sum
/// of the other eight entries. Throws NegativeCoefficient for any entry < 0.
inline Stencil3x3 build_stencil(double cxx, double cxy, double cyy, double cxxyy,
                                double delta_s) {
  if (!(delta_s > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_s must be positive");
  const double pos_diag = 0.25 * (cxy + cxxyy) * delta_s;   // (1,1), (-1,-1)
  const double neg_diag = 0.25 * (-cxy + cxxyy) * delta_s;  // (-1,1), (1,-1)
  const double horiz = 0.5 * (cxx - cxxyy) * delta_s;
  const double vert = 0.5 * (cyy - cxxyy) * delta_s;
  const double others = 2.0 * (pos_diag + neg_diag + horiz + vert);
  const double centre = 1.0 - others;
  std::array<double, 9> d = {neg_diag, vert, pos_diag,  //
                             horiz,    centre, horiz,   //
                             pos_diag, vert, neg_diag};
  const char* names[9] = {"(-1,+1)", "(0,+1)", "(+1,+1)", "(-1,0)", "(0,0)",
                          "(+1,0)",  "(-1,-1)", "(0,-1)", "(+1,-1)"};
  for (int i = 0; i < 9; ++i) {
    if (d[i] < -1e-15) {
      std::ostringstream os;
      os << "stencil entry " << names[i] << " = " << d[i] << " is negative";
      throw Error(ErrorKind::NegativeCoefficient, os.str());
    }
  }
  return Stencil3x3(d, {cxx, cxy, cyy, cxxyy, delta_s});
}

/// Second moments by direct summation over the nine entries; equal to
/// delta_s * (Cxx, Cxy, Cyy) for any stencil from build_stencil.
inline SecondMoments stencil_covariance(const Stencil3x3& st) {
  SecondMoments m;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const double a = st.at(dx, dy);
      m.cxx += a * dx * dx;
      m.cxy += a * dx * dy;
      m.cyy += a * dy * dy;
    }
  }
  return m;
}

struct ValidityReport {
  bool nonneg = false;
  bool center_dominance = false;
  bool corner_condition = false;
  bool ok = false;
};

namespace detail {
inline double lambda_max_of(double cxx, double cxy, double cyy) {
  return 0.5 * (cxx + cyy) + std::hypot(0.5 * (cxx - cyy), cxy);
}
}  // namespace detail

/// Checks one Euler step against: non-negative coefficients, axis neighbours
/// at most half the centre, corners at most a quarter of the centre. Expects
/// the covariance normalized to lambda_max = 1.
inline ValidityReport validate_step(double cxx, double cxy, double cyy, double cxxyy,
                                    double delta_s) {
  if (std::abs(detail::lambda_max_of(cxx, cxy, cyy) - 1.0) > 1e-9) {
    throw Error(ErrorKind::NotNormalized, "validate_step expects lambda_max = 1");
  }
  constexpr double tol = 1e-12;
  ValidityReport r;
  const double pos_diag = 0.25 * (cxy + cxxyy) * delta_s;
  const double neg_diag = 0.25 * (-cxy + cxxyy) * delta_s;
  const double horiz = 0.5 * (cxx - cxxyy) * delta_s;
  const double vert = 0.5 * (cyy - cxxyy) * delta_s;
  const double centre = 1.0 - (cxx + cyy - cxxyy) * delta_s;
  r.nonneg = std::min({pos_diag, neg_diag, horiz, vert, centre}) >= -tol;
  r.center_dominance = (cxx + cyy + std::max(cxx, cyy) - 2.0 * cxxyy) * delta_s <= 1.0 + tol;
  r.corner_condition = (cxx + cyy + std::abs(cxy)) * delta_s <= 1.0 + tol;
  r.ok = r.nonneg && r.center_dominance && r.corner_condition;
  return r;
}

inline ValidityReport validate_step(const CovarianceSpec& spec, double cxxyy, double delta_s) {
  return validate_step(spec.cxx(), spec.cxy(), spec.cyy(), cxxyy, delta_s);
}

/// Smallest Cxxyy admitting delta_s = 1/2 with non-negative coefficients and
/// axis neighbours at most half the centre.
inline double choose_cxxyy_iter(const CovarianceSpec& spec) {
  require_normalized(spec);
  const double cxx = spec.cxx(), cyy = spec.cyy();
  const double c = std::max(std::abs(spec.cxy()), (cxx + cyy + std::max(cxx, cyy) - 2.0) / 2.0);
  if (c > std::min(cxx, cyy) + 1e-12) {
    throw Error(ErrorKind::FeasibilityViolation,
                "no Cxxyy satisfies both positivity and centre dominance for this shape");
  }
  return c;
}

struct IterationPlan {
  Stencil3x3 stencil;
  int steps = 0;
  double residual_ds = 0.0;
  Stencil3x3 residual_stencil;  // identity when residual_ds == 0

  int applications() const { return steps + (residual_ds > 0.0 ? 1 : 0); }
};

/// Splits total_s into whole steps of delta_s_max plus one smaller residual
/// step. cxxyy defaults to choose_cxxyy_iter(spec).
inline IterationPlan plan_iterations(const CovarianceSpec& spec, double total_s,
                                     double delta_s_max = 0.5,
                                     double cxxyy = std::numeric_limits<double>::quiet_NaN()) {
  require_normalized(spec);
  if (!(total_s >= 0.0)) throw Error(ErrorKind::InvalidArgument, "total_s must be >= 0");
  if (!(delta_s_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta_s must be > 0");
  if (std::isnan(cxxyy)) cxxyy = choose_cxxyy_iter(spec);

  auto check = [&](double ds) {
    const auto v = validate_step(spec, cxxyy, ds);
    if (!v.ok) {
      std::ostringstream os;
      os << "scale step " << ds << " fails:" << (v.nonneg ? "" : " non-negativity")
         << (v.center_dominance ? "" : " centre-dominance")
         << (v.corner_condition ? "" : " corner-condition");
      throw Error(ErrorKind::InvalidScaleStep, os.str());
    }
  };

  IterationPlan plan;
  const double ratio = total_s / delta_s_max;
  int k = static_cast<int>(std::floor(ratio));
  double residual = total_s - k * delta_s_max;
  const double eps = 1e-12 * std::max(1.0, total_s);
  if (residual >= delta_s_max - eps) {
    ++k;
    residual = total_s - k * delta_s_max;
  }
  if (std::abs(residual) <= eps) residual = 0.0;
  plan.steps = k;
  plan.residual_ds = residual;
  if (k > 0) {
    check(delta_s_max);
    plan.stencil = build_stencil(spec.cxx(), spec.cxy(), spec.cyy(), cxxyy, delta_s_max);
  }
  if (residual > 0.0) {
    check(residual);
    plan.residual_stencil = build_stencil(spec.cxx(), spec.cxy(), spec.cyy(), cxxyy, residual);
  }
  return plan;
}

/// One periodic convolution with the stencil. Rows are processed in
/// parallel; each output sample is a pure gather.
inline RealImage apply_stencil(const RealImage& in, const Stencil3x3& st) {
  const int W = in.width(), H = in.height();
  RealImage out(W, H, in.spacing());
  const auto& a = st.display();
  parallel_rows(H, [&](int r) {
    const int up = wrap(r - 1, H), down = wrap(r + 1, H);
    for (int c = 0; c < W; ++c) {
      const int left = wrap(c - 1, W), right = wrap(c + 1, W);
      // out(x, y) = sum a(dx, dy) in(x - dx, y - dy); y - dy with dy = +1 is
      // the row below.
      double v = a[0] * in(right, down) + a[1] * in(c, down) + a[2] * in(left, down) +
                 a[3] * in(right, r) + a[4] * in(c, r) + a[5] * in(left, r) +
                 a[6] * in(right, up) + a[7] * in(c, up) + a[8] * in(left, up);
      out(c, r) = v;
    }
  });
  out.tags() = in.tags();
  return out;
}

inline RealImage iterate(const RealImage& image, const IterationPlan& plan) {
  if (image.width() < 3 || image.height() < 3) {
    throw Error(ErrorKind::InvalidArgument, "iteration needs an image of at least 3x3");
  }
  RealImage cur = image;
  for (int k = 0; k < plan.steps; ++k) cur = apply_stencil(cur, plan.stencil);
  if (plan.residual_ds > 0.0) cur = apply_stencil(cur, plan.residual_stencil);
  return cur;
}

/// Rank-one test: second singular value below 1e-12 times the first.
inline bool is_separable(const Stencil3x3& st) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = st.display()[i];
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m);
  const auto& sv = svd.singularValues();
  return sv(1) < 1e-12 * sv(0);
}

/// Exact rational text "p/q" when the double equals p/q for some q <= 2^16,
/// otherwise the shortest round-trip decimal.
inline std::string exact_text(double x) {
  for (std::int64_t q = 1; q <= (1 << 16); ++q) {
    const double pq = std::round(x * static_cast<double>(q));
    if (std::abs(pq) > 9.0e15) break;
    if (pq / static_cast<double>(q) == x) {
      const auto p = static_cast<std::int64_t>(pq);
      return q == 1 ? std::to_string(p) : std::to_string(p) + "/" + std::to_string(q);
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

inline std::string stencil_to_text(const Stencil3x3& st) {
  std::ostringstream os;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) os << (c ? " " : "") << exact_text(st.display()[r * 3 + c]);
    os << '\n';
  }
  return os.str();
}

inline void to_json(nlohmann::json& j, const Stencil3x3& st) {
  const auto cov = stencil_covariance(st);
  j = nlohmann::json{{"coefficients", st.display()},
                     {"cxx", st.meta().cxx},
                     {"cxy", st.meta().cxy},
                     {"cyy", st.meta().cyy},
                     {"cxxyy", st.meta().cxxyy},
                     {"delta_s", st.meta().delta_s},
                     {"covariance", {{"cxx", cov.cxx}, {"cxy", cov.cxy}, {"cyy", cov.cyy}}},
                     {"separable", is_separable(st)}};
}

inline void to_json(nlohmann::json& j, const ValidityReport& v) {
  j = nlohmann::json{{"nonneg", v.nonneg},
                     {"center_dominance", v.center_dominance},
                     {"corner_condition", v.corner_condition},
                     {"ok", v.ok}};
}

}  // namespace affscale
