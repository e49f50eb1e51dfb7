#pragma once

// Semi-discrete affine Gaussian scale space: the closed-form transfer function
// of the discrete kernel, kernel synthesis by inverse DFT, and smoothing in
// the Fourier domain. All convolutions are circular.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "affscale/covariance.hpp"
#include "affscale/error.hpp"
#include "affscale/fft.hpp"
#include "affscale/image.hpp"

namespace affscale {

inline constexpr const char* kNonPositiveKernelTag = "non-positive kernel";

enum class Feasibility { strict, permissive };

/// Shape Sigma, free fourth-order coefficient and scale. The generator is
/// s * (Cxx, Cxy, Cyy, Cxxyy); cxxyy scales with s like the other three.
struct SemiDiscreteParams {
  CovarianceSpec spec;
  double cxxyy = 0.0;
  double s = 1.0;
};

/// Real, positive DFT transfer samples psi(m, n); m along columns, n along rows.
struct SpectrumGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double operator()(int m, int n) const { return values[static_cast<std::size_t>(n) * width + m]; }
};

/// log psi(u, v) for angular frequencies u (along x) and v (along storage
/// rows). The mixed term carries +Cxy because rows run against the y axis.
inline double log_transfer(const SemiDiscreteParams& p, double u, double v) {
  const double cu = 1.0 - std::cos(u);
  const double cv = 1.0 - std::cos(v);
  return p.s * (-p.spec.cxx() * cu - p.spec.cyy() * cv +
                p.spec.cxy() * std::sin(u) * std::sin(v) + p.cxxyy * cu * cv);
}

inline SpectrumGrid transfer_function(const SemiDiscreteParams& p, int M, int N) {
  if (M < 4 || N < 4) throw Error(ErrorKind::InvalidArgument, "transfer grid must be at least 4x4");
  SpectrumGrid g{M, N, std::vector<double>(static_cast<std::size_t>(M) * N)};
  for (int n = 0; n < N; ++n) {
    const double v = 2.0 * std::numbers::pi * n / N;
    for (int m = 0; m < M; ++m) {
      const double u = 2.0 * std::numbers::pi * m / M;
      g.values[static_cast<std::size_t>(n) * M + m] = std::exp(log_transfer(p, u, v));
    }
  }
  return g;
}

inline bool is_feasible(const SemiDiscreteParams& p) {
  return cxxyy_feasibility(p.spec).contains(p.cxxyy, 1e-12 * (p.spec.cxx() + p.spec.cyy()));
}

namespace detail {

inline void check_feasibility(const SemiDiscreteParams& p, Feasibility mode) {
  if (mode == Feasibility::strict && !is_feasible(p)) {
    throw Error(ErrorKind::FeasibilityViolation,
                "Cxxyy outside [|Cxy|, min(Cxx, Cyy)]; the kernel would have negative values");
  }
}

}  // namespace detail

/// Kernel centred at (M/2, N/2) together with the largest imaginary residue
/// left by the inverse transform.
struct SynthesizedKernel {
  RealImage kernel;
  double imag_residue = 0.0;
};

inline SynthesizedKernel synthesize_kernel(const SemiDiscreteParams& p, int M, int N,
                                           Feasibility mode = Feasibility::strict) {
  detail::check_feasibility(p, mode);
  const SpectrumGrid psi = transfer_function(p, M, N);
  std::vector<fft::Complex> buf(psi.values.begin(), psi.values.end());
  auto spatial = fft::dft2(std::move(buf), M, N, fft::Direction::inverse);
  SynthesizedKernel out;
  RealImage k(M, N);
  for (std::size_t i = 0; i < spatial.size(); ++i) {
    k.data()[i] = spatial[i].real();
    out.imag_residue = std::max(out.imag_residue, std::abs(spatial[i].imag()));
  }
  out.kernel = circular_shift(k, M / 2, N / 2);
  if (!is_feasible(p)) out.kernel.tags().push_back(kNonPositiveKernelTag);
  return out;
}

/// Discrete affine Gaussian kernel on an M x N periodic grid, peak at (M/2, N/2).
inline RealImage generate_kernel(const SemiDiscreteParams& p, int M, int N,
                                 Feasibility mode = Feasibility::strict) {
  return synthesize_kernel(p, M, N, mode).kernel;
}

inline RealImage smooth(const RealImage& image, const SemiDiscreteParams& p,
                        Feasibility mode = Feasibility::strict) {
  detail::check_feasibility(p, mode);
  const int M = image.width(), N = image.height();
  if (M < 4 || N < 4) throw Error(ErrorKind::InvalidArgument, "image must be at least 4x4");
  const SpectrumGrid psi = transfer_function(p, M, N);
  std::vector<fft::Complex> buf(image.data().begin(), image.data().end());
  auto spectrum = fft::dft2(std::move(buf), M, N, fft::Direction::forward);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= psi.values[i];
  auto spatial = fft::dft2(std::move(spectrum), M, N, fft::Direction::inverse);
  RealImage out(M, N, image.spacing());
  for (std::size_t i = 0; i < spatial.size(); ++i) out.data()[i] = spatial[i].real();
  if (!is_feasible(p)) out.tags().push_back(kNonPositiveKernelTag);
  return out;
}

/// The minimal non-negative choice Cxxyy = |Cxy|.
inline double choose_cxxyy_minimal(const CovarianceSpec& spec) {
  const auto f = cxxyy_feasibility(spec);
  if (!f.feasible) {
    throw Error(ErrorKind::FeasibilityViolation,
                "|Cxy| exceeds min(Cxx, Cyy): no non-negative discretization exists");
  }
  return f.lower;
}

/// Cxxyy = (Cxx + Cyy) / 6, which makes the fourth-order low-frequency term
/// elliptic like the second-order one. Only defined for Cxy = 0.
inline double choose_cxxyy_lowfreq(const CovarianceSpec& spec) {
  if (std::abs(spec.cxy()) > 1e-12 * (spec.cxx() + spec.cyy())) {
    throw Error(ErrorKind::UnsupportedForNonzeroCxy, "low-frequency choice requires Cxy = 0");
  }
  return (spec.cxx() + spec.cyy()) / 6.0;
}

}  // namespace affscale
