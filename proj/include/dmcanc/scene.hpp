#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "dmcanc/compensation.hpp"
#include "dmcanc/delay_line.hpp"
#include "dmcanc/impulse_response.hpp"

namespace dmcanc {

/// Parameters for synthetic acoustic-path generation (the stand-in for
/// chamber-measured responses, which are not available).
struct PathSynthesisSpec {
  std::uint64_t seed = 1;
  Eigen::Index length = 256;     // L_s, shared by all generated paths
  Eigen::Index delay_min = 8;    // samples
  Eigen::Index delay_max = 40;   // samples, must stay below length
  double tau = 48.0;             // exponential decay constant, samples
  double cross_attenuation = 0.5;  // rho in (0, 1]
};

/// Immutable acoustic environment: K primary paths p_k, the true K x K
/// secondary-path matrix s_mk and its estimate s_hat_mk. Matrix orientation
/// is sensor-major: (m, k) = path from secondary source k to error sensor m.
class AcousticScene {
 public:
  AcousticScene(double fs, std::vector<ImpulseResponse> primary,
                std::vector<ImpulseResponse> secondary_true,
                std::vector<ImpulseResponse> secondary_est);

  int node_count() const { return K_; }
  double fs() const { return fs_; }

  const ImpulseResponse& primary(int k) const { return primary_.at(k); }
  const ImpulseResponse& secondary(int m, int k) const {
    return s_true_.at(static_cast<std::size_t>(m) * K_ + k);
  }
  const ImpulseResponse& secondary_estimate(int m, int k) const {
    return s_est_.at(static_cast<std::size_t>(m) * K_ + k);
  }

  Eigen::Index primary_length() const { return primary_.front().length(); }
  Eigen::Index secondary_length() const { return s_true_.front().length(); }
  Eigen::Index estimate_length() const { return s_est_.front().length(); }

 private:
  int K_;
  double fs_;
  std::vector<ImpulseResponse> primary_;
  std::vector<ImpulseResponse> s_true_;  // row-major, index m*K + k
  std::vector<ImpulseResponse> s_est_;
};

/// Random self-dominant scene. Self paths s_kk sit at the minimum delay with
/// unit norm; cross paths start strictly later and are scaled so the summed
/// crosstalk energy arriving at each sensor is rho^2 times its self-path
/// energy. Primary paths are drawn from the upper half of the delay range so
/// the secondary route is causally ahead of the disturbance. Estimates start
/// exact (s_hat = s); use perturb_estimates for mismatch studies.
AcousticScene synthesize_scene(const PathSynthesisSpec& spec, int K, double fs);

struct FactorableScene {
  AcousticScene scene;
  CompensationSet generators;  // the c_mk used to build the cross paths
};

/// Scene on which the compensation identity holds exactly: cross paths are
/// built as s_mk = s_mm * c_mk with generating filters of length L_c, and the
/// generators are returned for oracle tests. Requires
/// spec.length >= self-path length + L_c - 1 (self paths are drawn with
/// length spec.length - L_c + 1 so the products fit without truncation).
FactorableScene factorable_scene(const PathSynthesisSpec& spec, int K, double fs,
                                 Eigen::Index L_c);

/// Returns a copy whose estimates are s_mk plus seeded noise of relative
/// norm 10^(mismatch_db/20). mismatch_db = -inf means "none" and leaves the
/// estimates untouched.
AcousticScene perturb_estimates(const AcousticScene& scene, double mismatch_db,
                                std::uint64_t seed);

/// d_k(n): the reference stream filtered through primary path p_k.
double disturbance(const AcousticScene& scene, int k, const DelayLine& reference_line);

/// e_m(n) = d_m(n) - sum_k y_k(n) * s_mk(n). The cross-node interference is
/// the m != k portion of the sum; it is computed here, never stored.
double residual_error(const AcousticScene& scene, int m, double d_m,
                      std::span<const DelayLine> control_lines);

}  // namespace dmcanc
