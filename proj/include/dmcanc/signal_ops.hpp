#pragma once

#include <Eigen/Dense>

#include "dmcanc/delay_line.hpp"
#include "dmcanc/errors.hpp"
#include "dmcanc/impulse_response.hpp"

namespace dmcanc {

/// One output sample of h * x for the stream held in `line`:
/// sum_i h[i] * line[i]. Does not mutate the line.
template <typename Scalar, typename Derived>
Scalar fir_step(const TappedDelayLine<Scalar>& line, const Eigen::MatrixBase<Derived>& h) {
  if (line.capacity() < h.size())
    throw ConfigError("delay line capacity is smaller than the filter length");
  return h.dot(line.window(h.size()));
}

inline double fir_step(const TappedDelayLine<double>& line, const ImpulseResponse& h) {
  return fir_step(line, h.taps());
}

/// Full linear convolution, length a.size() + b.size() - 1.
template <typename DerivedA, typename DerivedB>
Eigen::Vector<typename DerivedA::Scalar, Eigen::Dynamic> convolve_full(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() == 0 || b.size() == 0) throw ConfigError("convolution of an empty sequence");
  Eigen::Vector<typename DerivedA::Scalar, Eigen::Dynamic> out =
      Eigen::Vector<typename DerivedA::Scalar, Eigen::Dynamic>::Zero(a.size() + b.size() - 1);
  for (Eigen::Index j = 0; j < b.size(); ++j) out.segment(j, a.size()) += b[j] * a;
  return out;
}

inline ImpulseResponse convolve_full(const ImpulseResponse& a, const ImpulseResponse& b) {
  return ImpulseResponse(convolve_full(a.taps(), b.taps()));
}

}  // namespace dmcanc
