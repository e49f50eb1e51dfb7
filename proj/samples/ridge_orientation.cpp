// Smooths a synthetic image with a few affine kernels and prints how strongly
// each responds at the image centre.
//
//   ./ridge_orientation

#include <cmath>
#include <cstdio>
#include <numbers>

#include "affscale/affscale.hpp"

using namespace affscale;

int main() {
  constexpr int n = 128;
  constexpr double pi = std::numbers::pi;

  // A bright ridge at 30 degrees, about 3 samples wide.
  RealImage img(n, n);
  const double c = std::cos(pi / 6), s = std::sin(pi / 6);
  for (int r = 0; r < n; ++r)
    for (int col = 0; col < n; ++col) {
      const double x = col - n / 2, y = n / 2 - r;
      const double across = -s * x + c * y;
      img(col, r) = std::exp(-across * across / 18.0);
    }

  NormalizationSpec norm;
  norm.mode = NormMode::variance;
  PathOptions fourier;

  std::printf("%8s %8s  %s\n", "alpha", "ecc", "second derivative across the axis");
  for (double ecc : {1.0, 0.25}) {
    for (int j = 0; j < 6; ++j) {
      const double alpha = j * pi / 6;
      const auto sigma = from_eigen(16, 16 * ecc, alpha);
      // Derivative of order two perpendicular to the kernel's long axis.
      const auto resp = derive(img, sigma, alpha, 0, 2, norm, fourier);
      std::printf("%8.3f %8.2f  %+.4f\n", alpha, ecc, resp.image(n / 2, n / 2));
      if (ecc == 1.0) break;
    }
  }
  return 0;
}
