#pragma once

// Thin wrapper over FFTW for 2-D complex DFTs of arbitrary size.
//
// Forward:  X(m, n) = sum_{c, r} x(c, r) exp(-2 pi i (m c / W + n r / H))
// Inverse:  includes the 1 / (W H) factor.
// Index m runs along columns, n along rows (storage order).

#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "affscale/error.hpp"

namespace affscale::fft {

using Complex = std::complex<double>;

namespace detail {
// Plan creation and destruction in FFTW are not thread-safe.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

enum class Direction { forward, inverse };

inline std::vector<Complex> dft2(std::vector<Complex> data, int width, int height,
                                 Direction dir) {
  if (data.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorKind::DimensionMismatch, "dft2: buffer size does not match dimensions");
  }
  std::vector<Complex> out(data.size());
  auto* in_ptr = reinterpret_cast<fftw_complex*>(data.data());
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = fftw_plan_dft_2d(height, width, in_ptr, out_ptr,
                            dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw Error(ErrorKind::InvalidArgument, "dft2: FFTW planning failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(plan);
  }
  if (dir == Direction::inverse) {
    const double scale = 1.0 / (static_cast<double>(width) * height);
    for (auto& v : out) v *= scale;
  }
  return out;
}

}  // namespace affscale::fft
