#pragma once

#include <Eigen/Dense>

#include "dmcanc/errors.hpp"

namespace dmcanc {

/// Fixed-capacity tapped delay line, most-recent-first: operator[](i) is the
/// sample from i steps ago, so a tap index equals its delay.
///
/// Samples are written twice into a 2N buffer so that the window of the last
/// n samples is always contiguous; window() maps it without copying, which
/// lets fir_step and the LMS updates run as plain Eigen dot/axpy kernels.
template <typename Scalar>
class TappedDelayLine {
 public:
  using Vector = Eigen::Vector<Scalar, Eigen::Dynamic>;

  explicit TappedDelayLine(Eigen::Index capacity)
      : buf_(Vector::Zero(2 * capacity)), capacity_(capacity), head_(0) {
    if (capacity < 1) throw ConfigError("delay line capacity must be positive");
  }

  Eigen::Index capacity() const { return capacity_; }

  /// Shifts history by one; the oldest sample falls off the end.
  void push(Scalar x) {
    head_ = (head_ == 0) ? capacity_ - 1 : head_ - 1;
    buf_[head_] = x;
    buf_[head_ + capacity_] = x;
  }

  /// Sample from i steps ago. Reads beyond capacity are an error.
  Scalar operator[](Eigen::Index i) const {
    if (i < 0 || i >= capacity_) throw ConfigError("delay line read beyond capacity");
    return buf_[head_ + i];
  }

  /// Contiguous view of the n most recent samples, most recent first.
  Eigen::Map<const Vector> window(Eigen::Index n) const {
    if (n < 0 || n > capacity_) throw ConfigError("delay line window exceeds capacity");
    return Eigen::Map<const Vector>(buf_.data() + head_, n);
  }

  void reset() {
    buf_.setZero();
    head_ = 0;
  }

 private:
  Vector buf_;
  Eigen::Index capacity_;
  Eigen::Index head_;
};

using DelayLine = TappedDelayLine<double>;

}  // namespace dmcanc
