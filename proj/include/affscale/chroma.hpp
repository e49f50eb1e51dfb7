#pragma once

// Colour-opponent channels and their receptive-field responses.

#include <utility>

#include "affscale/error.hpp"
#include "affscale/image.hpp"
#include "affscale/paths.hpp"

namespace affscale {

/// Intensity f, red/green u and yellow/blue v planes of linear RGB input.
struct OpponentImage {
  RealImage f, u, v;
};

/// Rows of the RGB -> (f, u, v) matrix.
inline constexpr double kOpponentMatrix[3][3] = {
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
    {0.5, -0.5, 0.0},
    {0.5, 0.5, -1.0},
};

inline OpponentImage rgb_to_opponent(const RealImage& r, const RealImage& g, const RealImage& b) {
  if (!r.same_shape(g) || !r.same_shape(b)) {
    throw Error(ErrorKind::DimensionMismatch, "RGB planes must share dimensions");
  }
  OpponentImage o{RealImage(r.width(), r.height(), r.spacing()),
                  RealImage(r.width(), r.height(), r.spacing()),
                  RealImage(r.width(), r.height(), r.spacing())};
  const auto& M = kOpponentMatrix;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double R = r.data()[i], G = g.data()[i], B = b.data()[i];
    o.f.data()[i] = M[0][0] * R + M[0][1] * G + M[0][2] * B;
    o.u.data()[i] = M[1][0] * R + M[1][1] * G + M[1][2] * B;
    o.v.data()[i] = M[2][0] * R + M[2][1] * G + M[2][2] * B;
  }
  return o;
}

struct OpponentResponse {
  DerivativeResponse U, V;
};

/// The same smoothing and directional operator applied to u and v separately.
inline OpponentResponse opponent_receptive_field(const OpponentImage& opp,
                                                 const CovarianceSpec& total, double phi,
                                                 int order_m, int order_n,
                                                 const NormalizationSpec& norm,
                                                 const PathOptions& o) {
  if (!opp.u.same_shape(opp.v) || !opp.u.same_shape(opp.f)) {
    throw Error(ErrorKind::DimensionMismatch, "opponent planes must share dimensions");
  }
  return {derive(opp.u, total, phi, order_m, order_n, norm, o),
          derive(opp.v, total, phi, order_m, order_n, norm, o)};
}

}  // namespace affscale
