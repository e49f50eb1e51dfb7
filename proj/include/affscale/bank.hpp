#pragma once

// Receptive-field families over size, eccentricity and orientation, applied
// as a filter bank with one smoothing pass per distinct covariance.

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "affscale/covariance.hpp"
#include "affscale/derivatives.hpp"
#include "affscale/error.hpp"
#include "affscale/image.hpp"
#include "affscale/paths.hpp"

namespace affscale {

struct BankSpec {
  // lambda_max values: size_first * size_ratio^i.
  double size_first = 16.0;
  double size_ratio = 2.0;
  int num_sizes = 1;
  // lambda_min / lambda_max values: ecc_first * ecc_ratio^i, within (0, 1].
  double ecc_first = 1.0;
  double ecc_ratio = 0.5;
  int num_eccentricities = 3;
  int num_orientations = 6;
  std::vector<std::pair<int, int>> orders = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  PathOptions path;
  NormalizationSpec norm;

  std::vector<double> sizes() const {
    std::vector<double> v;
    for (int i = 0; i < num_sizes; ++i) v.push_back(size_first * std::pow(size_ratio, i));
    return v;
  }
  std::vector<double> eccentricities() const {
    std::vector<double> v;
    for (int i = 0; i < num_eccentricities; ++i) v.push_back(ecc_first * std::pow(ecc_ratio, i));
    return v;
  }
  std::vector<double> orientations() const {
    std::vector<double> v;
    for (int j = 0; j < num_orientations; ++j) v.push_back(j * std::numbers::pi / num_orientations);
    return v;
  }
};

struct BankEntry {
  int size_index = 0, ecc_index = 0, orientation_index = 0;
  double size = 0, ecc = 0, phi = 0;
  int order_m = 0, order_n = 0;
  CovarianceSpec spec;
  bool feasible = true;
  std::string reason;  // why infeasible
};

/// Whether the path can discretize this covariance without negative weights.
inline std::pair<bool, std::string> path_feasibility(const CovarianceSpec& total,
                                                     const PathOptions& o) {
  try {
    switch (o.path) {
      case SmoothingPath::fourier: {
        if (!is_feasible(fourier_params(total, o))) return {false, "Cxxyy outside feasible interval"};
        return {true, ""};
      }
      case SmoothingPath::iter3x3:
      case SmoothingPath::pyramid: {
        const auto shape = split_scale(total).shape;
        const double c = std::isnan(o.cxxyy) ? choose_cxxyy_iter(shape) : o.cxxyy;
        if (!validate_step(shape, c, o.delta_s).ok) return {false, "scale step fails validation"};
        return {true, ""};
      }
    }
  } catch (const Error& e) {
    return {false, e.what()};
  }
  return {false, "unknown path"};
}

inline void check_bank_spec(const BankSpec& b) {
  if (b.num_sizes <= 0 || b.num_eccentricities <= 0 || b.num_orientations <= 0 ||
      b.orders.empty()) {
    throw Error(ErrorKind::EmptyBank, "bank has no entries");
  }
  if (!(b.size_first > 0) || !(b.size_ratio > 0) || !(b.ecc_first > 0) || !(b.ecc_ratio > 0)) {
    throw Error(ErrorKind::InvalidArgument, "bank parameters must be positive");
  }
  for (double e : b.eccentricities())
    if (e > 1.0 + 1e-12) throw Error(ErrorKind::OutOfRange, "eccentricity ratios must lie in (0, 1]");
  for (auto [m, n] : b.orders) check_order(m, n);
}

/// Cartesian product size x eccentricity x orientation x order. The
/// derivative direction is the orientation of the kernel's major axis.
inline std::vector<BankEntry> enumerate_bank(const BankSpec& b) {
  check_bank_spec(b);
  std::vector<BankEntry> out;
  const auto sizes = b.sizes(), eccs = b.eccentricities(), phis = b.orientations();
  for (std::size_t si = 0; si < sizes.size(); ++si)
    for (std::size_t ei = 0; ei < eccs.size(); ++ei)
      for (std::size_t oi = 0; oi < phis.size(); ++oi) {
        const CovarianceSpec spec = from_eigen(sizes[si], sizes[si] * eccs[ei], phis[oi]);
        const auto [ok, why] = path_feasibility(spec, b.path);
        for (auto [m, n] : b.orders) {
          out.push_back({static_cast<int>(si), static_cast<int>(ei), static_cast<int>(oi),
                         sizes[si], eccs[ei], phis[oi], m, n, spec, ok, why});
        }
      }
  return out;
}

/// arccos(sqrt(ratio)) in degrees for ratio = lambda_min / lambda_max.
inline double hemisphere_angle(double ratio) {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw Error(ErrorKind::OutOfRange, "eccentricity ratio must lie in (0, 1]");
  }
  return std::acos(std::sqrt(ratio)) * 180.0 / std::numbers::pi;
}

struct BankKey {
  int size_index, ecc_index, orientation_index, order_m, order_n;
  auto tie() const {
    return std::tie(size_index, ecc_index, orientation_index, order_m, order_n);
  }
  bool operator<(const BankKey& o) const { return tie() < o.tie(); }
  bool operator==(const BankKey& o) const { return tie() == o.tie(); }
};

struct BankResult {
  std::map<BankKey, DerivativeResponse> responses;
  std::vector<BankEntry> skipped;
  int smoothing_passes = 0;
};

/// Applies every feasible entry. Entries sharing a covariance share one
/// smoothed field; infeasible ones are listed in `skipped`.
inline BankResult apply_bank(const RealImage& image, const BankSpec& b) {
  BankResult res;
  const auto entries = enumerate_bank(b);
  auto cov_key = [](const CovarianceSpec& s) { return std::make_tuple(s.cxx(), s.cxy(), s.cyy()); };
  std::map<std::tuple<double, double, double>, SmoothedField> fields;
  for (const auto& e : entries) {
    if (!e.feasible) {
      res.skipped.push_back(e);
      continue;
    }
    auto it = fields.find(cov_key(e.spec));
    if (it == fields.end()) {
      it = fields.emplace(cov_key(e.spec), smooth_to_scale(image, e.spec, b.path)).first;
      ++res.smoothing_passes;
    }
    const SmoothedField& field = it->second;
    const auto op = directional_operator(e.phi, e.order_m, e.order_n);
    res.responses.emplace(
        BankKey{e.size_index, e.ecc_index, e.orientation_index, e.order_m, e.order_n},
        normalize_response(apply(field.image, op, field.spacing_h), field, e.spec, op, b.norm,
                           b.path, image.width(), image.height()));
  }
  return res;
}

inline void to_json(nlohmann::json& j, const BankEntry& e) {
  j = nlohmann::json{{"size_index", e.size_index},
                     {"ecc_index", e.ecc_index},
                     {"orientation_index", e.orientation_index},
                     {"size", e.size},
                     {"ecc", e.ecc},
                     {"phi", e.phi},
                     {"order", {e.order_m, e.order_n}},
                     {"spec", e.spec},
                     {"feasible", e.feasible},
                     {"hemisphere_angle_deg", hemisphere_angle(e.ecc)}};
  if (!e.feasible) j["reason"] = e.reason;
}

/// Reads a bank description; absent fields keep their defaults.
inline BankSpec bank_from_json(const nlohmann::json& j) {
  BankSpec b;
  b.size_first = j.value("size_first", b.size_first);
  b.size_ratio = j.value("size_ratio", b.size_ratio);
  b.num_sizes = j.value("num_sizes", b.num_sizes);
  b.ecc_first = j.value("ecc_first", b.ecc_first);
  b.ecc_ratio = j.value("ecc_ratio", b.ecc_ratio);
  b.num_eccentricities = j.value("num_eccentricities", b.num_eccentricities);
  b.num_orientations = j.value("num_orientations", b.num_orientations);
  if (j.contains("orders")) {
    b.orders.clear();
    for (const auto& o : j.at("orders")) b.orders.emplace_back(o.at(0).get<int>(), o.at(1).get<int>());
  }
  if (j.contains("path")) b.path.path = parse_path(j.at("path").get<std::string>());
  b.path.delta_s = j.value("delta_s", b.path.delta_s);
  b.path.K = j.value("K", b.path.K);
  b.path.rho = j.value("rho", b.path.rho);
  if (j.contains("norm")) {
    const auto& n = j.at("norm");
    const std::string mode = n.value("mode", std::string("none"));
    if (mode == "none") b.norm.mode = NormMode::none;
    else if (mode == "variance") b.norm.mode = NormMode::variance;
    else if (mode == "lp") b.norm.mode = NormMode::lp;
    else throw Error(ErrorKind::Format, "unknown norm mode '" + mode + "'");
    b.norm.gamma1 = n.value("gamma1", b.norm.gamma1);
    b.norm.gamma2 = n.value("gamma2", b.norm.gamma2);
    b.norm.p = n.value("p", b.norm.p);
  }
  return b;
}

}  // namespace affscale
