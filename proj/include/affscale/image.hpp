#pragma once

// Real-valued 2-D sample grids with periodic boundary semantics.
//
// Storage is row-major with row 0 at the top. The mathematical y axis points
// up, so a sample at offset (dx, dy) from an origin (col, row) is stored at
// (col + dx, row - dy). Stencils and masks are written with their top row at
// dy = +1, exactly as computational molecules are usually printed.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "affscale/error.hpp"

namespace affscale {

/// Positive modulus for periodic indexing.
inline int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

class RealImage {
 public:
  RealImage() = default;

  RealImage(int width, int height, double spacing_h = 1.0, double fill = 0.0)
      : width_(width), height_(height), spacing_h_(spacing_h) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
    }
    if (!(spacing_h > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
    }
    samples_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  RealImage(int width, int height, std::vector<double> samples, double spacing_h = 1.0)
      : RealImage(width, height, spacing_h) {
    if (samples.size() != samples_.size()) {
      throw Error(ErrorKind::DimensionMismatch, "sample count does not match width*height");
    }
    samples_ = std::move(samples);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double spacing() const noexcept { return spacing_h_; }
  void set_spacing(double h) { spacing_h_ = h; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  double& operator()(int col, int row) { return samples_[index(col, row)]; }
  double operator()(int col, int row) const { return samples_[index(col, row)]; }

  /// Periodic access by storage indices.
  double periodic(int col, int row) const {
    return samples_[index(wrap(col, width_), wrap(row, height_))];
  }

  std::span<double> samples() noexcept { return samples_; }
  std::span<const double> samples() const noexcept { return samples_; }
  std::vector<double>& data() noexcept { return samples_; }
  const std::vector<double>& data() const noexcept { return samples_; }

  /// Free-form tags, e.g. "non-positive kernel".
  std::vector<std::string>& tags() noexcept { return tags_; }
  const std::vector<std::string>& tags() const noexcept { return tags_; }
  bool has_tag(const std::string& t) const {
    return std::find(tags_.begin(), tags_.end(), t) != tags_.end();
  }

  bool same_shape(const RealImage& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  std::size_t index(int col, int row) const noexcept {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  double spacing_h_ = 1.0;
  std::vector<double> samples_;
  std::vector<std::string> tags_;
};

inline RealImage constant_image(int width, int height, double value, double h = 1.0) {
  return RealImage(width, height, h, value);
}

/// Unit impulse at storage position (col, row).
inline RealImage impulse_image(int width, int height, int col, int row, double h = 1.0) {
  RealImage img(width, height, h);
  img(col, row) = 1.0;
  return img;
}

inline double sum(const RealImage& img) {
  return std::accumulate(img.data().begin(), img.data().end(), 0.0);
}

inline double mean(const RealImage& img) { return sum(img) / static_cast<double>(img.size()); }

inline double min_value(const RealImage& img) {
  return *std::min_element(img.data().begin(), img.data().end());
}

inline double max_abs_diff(const RealImage& a, const RealImage& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double l1_distance(const RealImage& a, const RealImage& b) {
  if (!a.same_shape(b)) throw Error(ErrorKind::DimensionMismatch, "l1_distance shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
  return s;
}

/// Circular shift by (dcol, drow) storage positions.
inline RealImage circular_shift(const RealImage& img, int dcol, int drow) {
  RealImage out(img.width(), img.height(), img.spacing());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      out(wrap(c + dcol, img.width()), wrap(r + drow, img.height())) = img(c, r);
  out.tags() = img.tags();
  return out;
}

/// Exact quarter turn counter-clockwise in the y-up frame: (x, y) -> (-y, x).
/// Requires a square image; the origin is the storage position (0, 0).
inline RealImage rotate_quarter_turn(const RealImage& img) {
  if (img.width() != img.height())
    throw Error(ErrorKind::DimensionMismatch, "quarter-turn rotation needs a square image");
  const int n = img.width();
  RealImage out(n, n, img.spacing());
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int x = c, y = -r;
      const int nx = -y, ny = x;
      out(wrap(nx, n), wrap(-ny, n)) = img(c, r);
    }
  }
  return out;
}

/// Mass, mean and central second moments of a kernel on a periodic grid.
/// Offsets are taken relative to (origin_col, origin_row) and wrapped into
/// (-W/2, W/2] and (-H/2, H/2]; y is measured upwards.
struct KernelMoments {
  double mass = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double cxx = 0.0;
  double cxy = 0.0;
  double cyy = 0.0;
};

inline int centered_offset(int i, int n) {
  int d = wrap(i, n);
  if (d > n / 2) d -= n;
  return d;
}

inline KernelMoments kernel_moments(const RealImage& k, int origin_col, int origin_row) {
  KernelMoments m;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (int r = 0; r < k.height(); ++r) {
    const double y = -centered_offset(r - origin_row, k.height());
    for (int c = 0; c < k.width(); ++c) {
      const double x = centered_offset(c - origin_col, k.width());
      const double v = k(c, r);
      m.mass += v;
      sx += v * x;
      sy += v * y;
      sxx += v * x * x;
      sxy += v * x * y;
      syy += v * y * y;
    }
  }
  m.mean_x = sx / m.mass;
  m.mean_y = sy / m.mass;
  m.cxx = sxx / m.mass - m.mean_x * m.mean_x;
  m.cxy = sxy / m.mass - m.mean_x * m.mean_y;
  m.cyy = syy / m.mass - m.mean_y * m.mean_y;
  return m;
}

/// Moments about the conventional kernel centre (W/2, H/2).
inline KernelMoments kernel_moments(const RealImage& k) {
  return kernel_moments(k, k.width() / 2, k.height() / 2);
}

// ---------------------------------------------------------------------------
// Row-parallel execution. Work is split into contiguous row blocks; every
// output row is written by exactly one worker, so results do not depend on
// the partitioning.

namespace detail {
inline std::atomic<int>& thread_limit_storage() {
  static std::atomic<int> limit{0};
  return limit;
}
}  // namespace detail

/// Caps worker threads; 0 means "hardware concurrency".
inline void set_thread_limit(int n) { detail::thread_limit_storage() = std::max(0, n); }

inline int thread_limit() {
  int n = detail::thread_limit_storage();
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

template <class RowFn>
void parallel_rows(int rows, RowFn&& fn) {
  const int workers = std::min(thread_limit(), std::max(1, rows / 16));
  if (workers <= 1) {
    for (int r = 0; r < rows; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = rows * w / workers;
    const int end = rows * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn] {
      for (int r = begin; r < end; ++r) fn(r);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace affscale
