#pragma once

// Spatial covariance matrices of affine Gaussian kernels, in matrix form
// (Cxx, Cxy, Cyy) and eigen form (lambda1 >= lambda2, alpha in [0, pi)).

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <json.hpp>

#include "affscale/error.hpp"

namespace affscale {

struct EigenForm {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double alpha = 0.0;
};

/// Symmetric positive-definite 2x2 covariance matrix.
class CovarianceSpec {
 public:
  CovarianceSpec() : CovarianceSpec(1.0, 0.0, 1.0) {}

  /// Throws NotPositiveDefinite unless cxx, cyy > 0 and the determinant is
  /// positive relative to cxx*cyy.
  CovarianceSpec(double cxx, double cxy, double cyy) : cxx_(cxx), cxy_(cxy), cyy_(cyy) {
    if (!(cxx > 0.0) || !(cyy > 0.0) || !(cxx * cyy - cxy * cxy > 1e-14 * cxx * cyy)) {
      throw Error(ErrorKind::NotPositiveDefinite, "covariance matrix is not positive definite");
    }
  }

  double cxx() const noexcept { return cxx_; }
  double cxy() const noexcept { return cxy_; }
  double cyy() const noexcept { return cyy_; }
  double det() const noexcept { return cxx_ * cyy_ - cxy_ * cxy_; }

  /// Eigen form with lambda1 >= lambda2 and alpha in [0, pi); alpha = 0 when
  /// the eigenvalues coincide.
  EigenForm eigen() const {
    const double half_trace = 0.5 * (cxx_ + cyy_);
    const double half_diff = 0.5 * (cxx_ - cyy_);
    const double radius = std::hypot(half_diff, cxy_);
    EigenForm e;
    e.lambda1 = half_trace + radius;
    e.lambda2 = half_trace - radius;
    if (radius <= 1e-15 * half_trace) {
      e.alpha = 0.0;
    } else {
      double a = 0.5 * std::atan2(2.0 * cxy_, cxx_ - cyy_);
      if (a < 0.0) a += std::numbers::pi;
      if (a >= std::numbers::pi) a -= std::numbers::pi;
      e.alpha = a;
    }
    // Recompute the smaller eigenvalue from the determinant to avoid
    // cancellation for strongly eccentric matrices.
    e.lambda2 = det() / e.lambda1;
    return e;
  }

  double lambda_max() const { return eigen().lambda1; }
  double lambda_min() const { return eigen().lambda2; }

  CovarianceSpec scaled(double s) const { return CovarianceSpec(s * cxx_, s * cxy_, s * cyy_); }

  friend bool operator==(const CovarianceSpec&, const CovarianceSpec&) = default;

 private:
  double cxx_, cxy_, cyy_;
};

inline CovarianceSpec from_eigen(double lambda1, double lambda2, double alpha) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw Error(ErrorKind::NonPositiveEigenvalue, "eigenvalues must be positive");
  }
  // Written around lambda2 so equal eigenvalues give an exactly diagonal result.
  const double c = std::cos(alpha), s = std::sin(alpha), d = lambda1 - lambda2;
  return CovarianceSpec(lambda2 + d * c * c, d * c * s, lambda2 + d * s * s);
}

inline EigenForm to_eigen(const CovarianceSpec& spec) { return spec.eigen(); }

/// A * Sigma * A^T for the 2x2 map A = [[a11, a12], [a21, a22]].
inline CovarianceSpec affine_transform(const CovarianceSpec& spec, double a11, double a12,
                                       double a21, double a22) {
  const double det_a = a11 * a22 - a12 * a21;
  if (det_a == 0.0) throw Error(ErrorKind::SingularTransform, "affine map is singular");
  // (A Sigma)
  const double m11 = a11 * spec.cxx() + a12 * spec.cxy();
  const double m12 = a11 * spec.cxy() + a12 * spec.cyy();
  const double m21 = a21 * spec.cxx() + a22 * spec.cxy();
  const double m22 = a21 * spec.cxy() + a22 * spec.cyy();
  return CovarianceSpec(m11 * a11 + m12 * a12, m11 * a21 + m12 * a22, m21 * a21 + m22 * a22);
}

/// Range of the free fourth-order parameter Cxxyy giving a non-negative
/// generator: |Cxy| <= Cxxyy <= min(Cxx, Cyy).
struct FeasibilityInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = false;

  bool contains(double cxxyy, double tol = 0.0) const {
    return cxxyy >= lower - tol && cxxyy <= upper + tol;
  }
};

inline FeasibilityInterval cxxyy_feasibility(const CovarianceSpec& spec) {
  FeasibilityInterval f;
  f.lower = std::abs(spec.cxy());
  f.upper = std::min(spec.cxx(), spec.cyy());
  f.feasible = f.lower <= f.upper;
  return f;
}

/// Largest lambda1/lambda2 with a non-empty feasibility interval at
/// orientation alpha. From |l1 - l2| (|cos 2a| + |sin 2a|) <= l1 + l2.
inline double max_feasible_eccentricity(double alpha) {
  const double t = std::abs(std::cos(2.0 * alpha)) + std::abs(std::sin(2.0 * alpha));
  if (t <= 1.0 + 1e-15) return std::numeric_limits<double>::infinity();
  return (t + 1.0) / (t - 1.0);
}

/// Angle from the north pole of the hemisphere of affine shapes, in degrees,
/// for eccentricity lambda_max / lambda_min.
inline double hemisphere_angle_for_eccentricity(double eccentricity) {
  return std::acos(1.0 / std::sqrt(eccentricity)) * 180.0 / std::numbers::pi;
}

/// Split a covariance matrix into a unit-lambda_max shape and the multiplier.
inline std::pair<CovarianceSpec, double> normalize(const CovarianceSpec& spec) {
  const double lmax = spec.lambda_max();
  return {spec.scaled(1.0 / lmax), lmax};
}

inline bool is_normalized(const CovarianceSpec& spec, double tol = 1e-9) {
  return std::abs(spec.lambda_max() - 1.0) <= tol;
}

inline void require_normalized(const CovarianceSpec& spec) {
  if (!is_normalized(spec)) {
    throw Error(ErrorKind::NotNormalized, "covariance must be normalized to lambda_max = 1");
  }
}

// JSON: matrix form on output; matrix or eigen form accepted on input.

inline void to_json(nlohmann::json& j, const CovarianceSpec& s) {
  j = nlohmann::json{{"cxx", s.cxx()}, {"cxy", s.cxy()}, {"cyy", s.cyy()}};
}

inline void from_json(const nlohmann::json& j, CovarianceSpec& s) {
  if (j.contains("cxx")) {
    s = CovarianceSpec(j.at("cxx").get<double>(), j.at("cxy").get<double>(),
                       j.at("cyy").get<double>());
  } else if (j.contains("lambda1")) {
    s = from_eigen(j.at("lambda1").get<double>(), j.at("lambda2").get<double>(),
                   j.value("alpha", 0.0));
  } else {
    throw Error(ErrorKind::Format, "covariance JSON needs cxx/cxy/cyy or lambda1/lambda2/alpha");
  }
}

}  // namespace affscale
