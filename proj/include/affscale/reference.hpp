#pragma once

// Continuous affine Gaussian kernels and their directional derivatives,
// sampled on a centred grid, plus L_p norms by quadrature. This is the
// comparison oracle for every discrete path.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "affscale/covariance.hpp"
#include "affscale/error.hpp"
#include "affscale/image.hpp"

namespace affscale {

inline void check_order(int order_m, int order_n) {
  if (order_m < 0 || order_n < 0 || order_m + order_n > 2) {
    throw Error(ErrorKind::UnsupportedOrder, "derivative orders must satisfy m, n >= 0, m + n <= 2");
  }
}

/// Precomputed inverse covariance and derivative directions.
class AffineGaussian {
 public:
  AffineGaussian(const CovarianceSpec& spec, double phi)
      : det_(spec.det()),
        ixx_(spec.cyy() / det_),
        ixy_(-spec.cxy() / det_),
        iyy_(spec.cxx() / det_),
        v_{std::cos(phi), std::sin(phi)},
        w_{-std::sin(phi), std::cos(phi)} {}

  double value(double x, double y) const {
    const double q = x * (ixx_ * x + ixy_ * y) + y * (ixy_ * x + iyy_ * y);
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * std::sqrt(det_));
  }

  /// d_phi^m d_perp^n g at (x, y), total order <= 2.
  double derivative(int m, int n, double x, double y) const {
    const double g = value(x, y);
    const double sx = ixx_ * x + ixy_ * y;  // Sigma^{-1} x
    const double sy = ixy_ * x + iyy_ * y;
    const double pv = v_[0] * sx + v_[1] * sy;
    const double pw = w_[0] * sx + w_[1] * sy;
    auto form = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
      return a[0] * (ixx_ * b[0] + ixy_ * b[1]) + a[1] * (ixy_ * b[0] + iyy_ * b[1]);
    };
    switch (m * 3 + n) {
      case 0: return g;
      case 3: return -pv * g;
      case 1: return -pw * g;
      case 6: return (pv * pv - form(v_, v_)) * g;
      case 4: return (pv * pw - form(v_, w_)) * g;
      case 2: return (pw * pw - form(w_, w_)) * g;
      default: throw Error(ErrorKind::UnsupportedOrder, "total order above two");
    }
  }

 private:
  double det_, ixx_, ixy_, iyy_;
  std::array<double, 2> v_, w_;
};

/// Samples g(x; Sigma) at integer offsets from the centre of an odd-sized
/// grid. Not renormalized.
inline RealImage continuous_directional_derivative(const CovarianceSpec& spec, double phi,
                                                   int order_m, int order_n, int size_m,
                                                   int size_n) {
  check_order(order_m, order_n);
  if (size_m % 2 == 0 || size_n % 2 == 0) {
    throw Error(ErrorKind::EvenSize, "continuous kernels are sampled on odd-sized grids");
  }
  const AffineGaussian g(spec, phi);
  RealImage out(size_m, size_n);
  const int cx = size_m / 2, cy = size_n / 2;
  for (int r = 0; r < size_n; ++r)
    for (int c = 0; c < size_m; ++c)
      out(c, r) = g.derivative(order_m, order_n, c - cx, cy - r);
  return out;
}

inline RealImage continuous_kernel(const CovarianceSpec& spec, int size_m, int size_n) {
  return continuous_directional_derivative(spec, 0.0, 0, 0, size_m, size_n);
}

// ---------------------------------------------------------------------------
// Quadrature.
//
// After whitening x = L z (Sigma = L L^T) the integrand becomes
// |P(z)|^p phi2(z)^p det(L)^(1-p) with P a polynomial of degree <= 2. A
// rotation brings P to A z1^2 + B z2^2 + C z1 + D, whose sign changes are
// known in closed form. Composite Gauss-Legendre is applied on the smooth
// pieces between them and the panel count is doubled until two successive
// levels agree.

namespace detail {

struct GaussLegendre8 {
  std::array<double, 8> x{}, w{};
  GaussLegendre8() {
    constexpr int n = 8;
    for (int i = 0; i < n; ++i) {
      double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (t * p1 - p0) / (t * t - 1.0);
        const double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-16) break;
      }
      x[i] = t;
      w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};

inline const GaussLegendre8& gauss_legendre8() {
  static const GaussLegendre8 rule;
  return rule;
}

/// Integral of f over [a, b] split at sorted interior breakpoints, with
/// `panels` equal panels per piece.
template <class F>
double piecewise_gl(F&& f, double a, double b, std::vector<double> cuts, int panels) {
  const auto& gl = gauss_legendre8();
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return !(c > a && c < b); }),
             cuts.end());
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> edges;
  edges.push_back(a);
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  edges.push_back(b);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double lo = edges[s], hi = edges[s + 1];
    const double h = (hi - lo) / panels;
    for (int k = 0; k < panels; ++k) {
      const double mid = lo + (k + 0.5) * h, half = 0.5 * h;
      for (int i = 0; i < 8; ++i) total += gl.w[i] * half * f(mid + half * gl.x[i]);
    }
  }
  return total;
}

/// Polynomial A z1^2 + B z2^2 + C z1 + D in rotated whitened coordinates.
struct WhitenedPolynomial {
  double A = 0, B = 0, C = 0, D = 1;
  double jacobian_power = 0;  // exponent of det(L) left over
};

inline WhitenedPolynomial whitened_polynomial(const CovarianceSpec& spec, double phi, int m,
                                              int n) {
  const double l11 = std::sqrt(spec.cxx());
  const double l21 = spec.cxy() / l11;
  const double l22 = std::sqrt(spec.cyy() - l21 * l21);
  auto solve = [&](double bx, double by) {  // L^{-1} b
    const double z1 = bx / l11;
    return std::array<double, 2>{z1, (by - l21 * z1) / l22};
  };
  const auto a_v = solve(std::cos(phi), std::sin(phi));
  const auto a_w = solve(-std::sin(phi), std::cos(phi));
  WhitenedPolynomial P;
  if (m + n == 0) return P;
  if (m + n == 1) {
    const auto& a = m == 1 ? a_v : a_w;
    P.A = P.B = P.D = 0.0;
    P.C = -std::hypot(a[0], a[1]);
    return P;
  }
  const auto& a = m >= 1 ? a_v : a_w;
  const auto& b = m == 2 ? a_v : a_w;
  // Symmetric part of a b^T and its eigen-decomposition.
  const double s11 = a[0] * b[0];
  const double s22 = a[1] * b[1];
  const double s12 = 0.5 * (a[0] * b[1] + a[1] * b[0]);
  const double mean = 0.5 * (s11 + s22);
  const double rad = std::hypot(0.5 * (s11 - s22), s12);
  double mu1 = mean + rad, mu2 = mean - rad;
  if (std::abs(mu2) > std::abs(mu1)) std::swap(mu1, mu2);
  P.A = mu1;
  P.B = mu2;
  P.C = 0.0;
  P.D = -(a[0] * b[0] + a[1] * b[1]);
  return P;
}

}  // namespace detail

/// Integral over R^2 of |d_phi^m d_perp^n g|^p (or the signed integral when
/// `absolute` is false, p ignored). Refines until successive levels agree to
/// rel_tol; throws QuadratureNonConvergence after 12 levels.
inline double integrate_continuous(const CovarianceSpec& spec, double phi, int order_m,
                                   int order_n, double p, bool absolute, double rel_tol = 1e-8) {
  check_order(order_m, order_n);
  if (absolute && !(p >= 1.0)) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  const auto P = detail::whitened_polynomial(spec, phi, order_m, order_n);
  const double pe = absolute ? p : 1.0;
  const double detL = std::sqrt(spec.det());
  const double R = std::sqrt(2.0 * 60.0 / pe) + 1.0;
  const double norm1d = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  auto integrand = [&](double z1, double z2) {
    const double q = P.A * z1 * z1 + P.B * z2 * z2 + P.C * z1 + P.D;
    const double gauss = norm1d * norm1d * std::exp(-0.5 * (z1 * z1 + z2 * z2));
    const double v = q * gauss;
    return absolute ? std::pow(std::abs(v), pe) : v;
  };
  auto inner_cuts = [&](double z2) {
    std::vector<double> cuts;
    const double c0 = P.B * z2 * z2 + P.D;
    if (P.A != 0.0) {
      const double disc = P.C * P.C - 4.0 * P.A * c0;
      if (disc > 0.0) {
        const double sq = std::sqrt(disc);
        cuts.push_back((-P.C - sq) / (2.0 * P.A));
        cuts.push_back((-P.C + sq) / (2.0 * P.A));
      }
    } else if (P.C != 0.0) {
      cuts.push_back(-c0 / P.C);
    }
    return cuts;
  };
  std::vector<double> outer_cuts = {0.0};
  if (P.A != 0.0 && P.B != 0.0) {
    const double z2sq = (P.C * P.C / (4.0 * P.A) - P.D) / P.B;
    if (z2sq > 0.0) {
      outer_cuts.push_back(-std::sqrt(z2sq));
      outer_cuts.push_back(std::sqrt(z2sq));
    }
  }

  auto evaluate = [&](int panels) {
    auto row = [&](double z2) {
      return detail::piecewise_gl([&](double z1) { return integrand(z1, z2); }, -R, R,
                                  inner_cuts(z2), panels);
    };
    return detail::piecewise_gl(row, -R, R, outer_cuts, panels);
  };

  // Jacobian dx = det(L) dz; |g|^p carries det(L)^-p.
  const double scale = absolute ? std::pow(detL, 1.0 - pe) : 1.0;
  double prev = evaluate(1) * scale;
  for (int level = 1; level <= 12; ++level) {
    const double cur = evaluate(1 << level) * scale;
    const double ref = std::max(std::abs(cur), absolute ? 0.0 : 1e-300);
    if (std::abs(cur - prev) <= rel_tol * ref || (!absolute && std::abs(cur - prev) < 1e-14)) {
      return cur;
    }
    prev = cur;
  }
  throw Error(ErrorKind::QuadratureNonConvergence, "quadrature did not converge in 12 levels");
}

/// ||d_phi^m d_perp^n g(.; Sigma)||_p over R^2.
inline double lp_norm_continuous(const CovarianceSpec& spec, double phi, int order_m, int order_n,
                                 double p) {
  return std::pow(integrate_continuous(spec, phi, order_m, order_n, p, true), 1.0 / p);
}

}  // namespace affscale
