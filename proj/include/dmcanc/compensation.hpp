#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dmcanc/errors.hpp"
#include "dmcanc/impulse_response.hpp"

namespace dmcanc {

class AcousticScene;

/// The K(K-1) cross-path compensation filters c_mk (m = sensor, k = source,
/// m != k) mapping a node's self secondary path onto its cross paths, plus
/// the least-squares fit residual of each pair.
class CompensationSet {
 public:
  CompensationSet(int K, Eigen::Index L_c)
      : K_(K),
        L_c_(L_c),
        filters_(static_cast<std::size_t>(K) * K, ImpulseResponse(Eigen::VectorXd::Zero(L_c))),
        residuals_(Eigen::MatrixXd::Zero(K, K)) {
    if (K < 1) throw ConfigError("compensation set needs K >= 1");
    if (L_c < 1) throw ConfigError("compensation filter length must be >= 1");
  }

  int node_count() const { return K_; }
  Eigen::Index filter_length() const { return L_c_; }

  const ImpulseResponse& filter(int m, int k) const {
    check_pair(m, k);
    return filters_[static_cast<std::size_t>(m) * K_ + k];
  }
  void set_filter(int m, int k, ImpulseResponse c) {
    check_pair(m, k);
    if (c.length() != L_c_) throw ConfigError("compensation filter length mismatch");
    filters_[static_cast<std::size_t>(m) * K_ + k] = std::move(c);
  }

  double residual(int m, int k) const {
    check_pair(m, k);
    return residuals_(m, k);
  }
  void set_residual(int m, int k, double r) {
    check_pair(m, k);
    residuals_(m, k) = r;
  }

 private:
  void check_pair(int m, int k) const {
    if (m < 0 || m >= K_ || k < 0 || k >= K_)
      throw ConfigError("compensation pair index out of range");
    if (m == k) throw ConfigError("compensation filters exist only for m != k");
  }

  int K_;
  Eigen::Index L_c_;
  std::vector<ImpulseResponse> filters_;
  Eigen::MatrixXd residuals_;
};

/// Transports a most-recent-first tap vector across a compensation filter:
///
///   out[i] = sum_j c[j] * vec[i + j],   i = 0 .. out_len-1
///
/// Tap index equals delay, so entry i of the result is the input series
/// filtered by c, evaluated i samples ago -- exactly the cross-path
/// filtered-reference (or weight-difference) contribution a receiving node
/// needs. Entries past the end of vec count as zero; a caller that supplies
/// out_len + c.length - 1 samples of history gets an edge-free result.
///
/// Note this is a correlation along the tap axis, not a tap-axis convolution:
/// tap vectors carry newest-first time series, so applying c causally in time
/// means reading *older* (higher-index) entries.
template <typename Derived>
Eigen::VectorXd apply_compensation(const Eigen::MatrixBase<Derived>& vec,
                                   const ImpulseResponse& c, Eigen::Index out_len) {
  if (out_len < 1) throw ConfigError("apply_compensation needs a positive output length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_len);
  for (Eigen::Index j = 0; j < c.length(); ++j) {
    const Eigen::Index n = std::min(out_len, vec.size() - j);
    if (n > 0) out.head(n) += c[j] * vec.segment(j, n);
  }
  return out;
}

inline Eigen::VectorXd apply_compensation(const Eigen::Ref<const Eigen::VectorXd>& vec,
                                          const ImpulseResponse& c) {
  return apply_compensation(vec, c, vec.size());
}

/// Offline least-squares identification of every c_mk from the secondary-path
/// estimates: minimizes |s_hat_mk - s_hat_mm * c|_2 over length-L_c filters,
/// via Tikhonov-regularized normal equations (lambda = 1e-10 times the peak
/// autocorrelation of s_hat_mm). Residual norms are recomputed from the
/// returned filters by direct convolution.
CompensationSet estimate_compensation(const AcousticScene& scene, Eigen::Index L_c);

}  // namespace dmcanc
