#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affscale {

enum class ErrorKind {
  NonPositiveEigenvalue,
  NotPositiveDefinite,
  SingularTransform,
  EvenSize,
  UnsupportedOrder,
  QuadratureNonConvergence,
  FeasibilityViolation,
  UnsupportedForNonzeroCxy,
  DimensionMismatch,
  NegativeCoefficient,
  NotNormalized,
  InvalidScaleStep,
  InvalidArgument,
  ZeroDiscreteNorm,
  OddDimensions,
  DegenerateEccentricity,
  UnreachableTarget,
  DimensionNotDivisible,
  EmptyBank,
  OutOfRange,
  Io,
  Format,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SingularTransform: return "SingularTransform";
    case ErrorKind::EvenSize: return "EvenSize";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorKind::FeasibilityViolation: return "FeasibilityViolation";
    case ErrorKind::UnsupportedForNonzeroCxy: return "UnsupportedForNonzeroCxy";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NegativeCoefficient: return "NegativeCoefficient";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::InvalidScaleStep: return "InvalidScaleStep";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ZeroDiscreteNorm: return "ZeroDiscreteNorm";
    case ErrorKind::OddDimensions: return "OddDimensions";
    case ErrorKind::DegenerateEccentricity: return "DegenerateEccentricity";
    case ErrorKind::UnreachableTarget: return "UnreachableTarget";
    case ErrorKind::DimensionNotDivisible: return "DimensionNotDivisible";
    case ErrorKind::EmptyBank: return "EmptyBank";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Format: return "Format";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace affscale
