#pragma once

#include <Eigen/Dense>
#include <utility>

#include "dmcanc/errors.hpp"

namespace dmcanc {

/// A finite FIR tap vector. Index equals delay in samples: taps()[i] weights
/// the input from i steps ago. Length is fixed at construction and every tap
/// is checked finite, so downstream convolutions never have to re-validate.
class ImpulseResponse {
 public:
  explicit ImpulseResponse(Eigen::VectorXd taps) : taps_(std::move(taps)) {
    if (taps_.size() < 1) throw ConfigError("impulse response must have at least one tap");
    if (!taps_.allFinite()) throw ConfigError("impulse response has non-finite taps");
  }

  /// The identity element: a single unit tap.
  static ImpulseResponse unit() { return ImpulseResponse(Eigen::VectorXd::Ones(1)); }

  /// A unit tap after `delay` zeros (the pure delay of `delay` samples).
  static ImpulseResponse delayed_unit(Eigen::Index delay) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(delay + 1);
    t[delay] = 1.0;
    return ImpulseResponse(std::move(t));
  }

  Eigen::Index length() const { return taps_.size(); }
  const Eigen::VectorXd& taps() const { return taps_; }
  double operator[](Eigen::Index i) const { return taps_[i]; }
  double norm() const { return taps_.norm(); }

 private:
  Eigen::VectorXd taps_;
};

}  // namespace dmcanc
