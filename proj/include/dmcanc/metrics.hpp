#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dmcanc/protocol.hpp"

namespace dmcanc {

/// Complete record of one simulated run.
struct RunLog {
  double fs = 0.0;
  int K = 0;
  std::int64_t n_samples = 0;
  Eigen::Index anse_window = 5000;

  Eigen::MatrixXd errors;        // n_samples x K, e_k(n)
  Eigen::MatrixXd disturbances;  // n_samples x K, d_k(n)
  std::vector<double> anse_db;   // per sample; NaN marks the warm-up region

  std::vector<CommEvent> events;       // MWD exchanges (sync/async policies)
  std::int64_t comm_event_count = 0;   // includes per-sample gradient exchanges

  std::vector<Eigen::VectorXd> final_weights;   // w_k at the end of the run
  std::vector<Eigen::VectorXd> final_centers;   // w_center_k at the end
  Eigen::MatrixXd weight_norm_history;          // rows: window boundaries, cols: K
  std::vector<std::int64_t> weight_norm_samples;

  bool ended_early = false;  // file-stream noise ran out under the Stop policy
  std::optional<std::pair<int, std::int64_t>> nonfinite_abort;  // (node, sample)

  std::string resolved_config_json;
  std::string config_hash;
};

/// ANSE(n) = (1/K) sum_k 10*log10(mean e_k^2 / mean d_k^2), expectations
/// realized as trailing moving averages over n_avg samples. Entries before
/// the first full window are NaN (warm-up); a window with zero disturbance
/// energy is also NaN (undefined, excluded from plots).
std::vector<double> anse_series(const Eigen::MatrixXd& errors,
                                const Eigen::MatrixXd& disturbances, Eigen::Index n_avg);

/// ANSE at one sample index, recomputed directly from the log.
double anse(const RunLog& log, Eigen::Index n, Eigen::Index n_avg);

/// Averaged-periodogram spectrum estimate: 4096-sample segments, 50% overlap,
/// periodic Hann window, one-sided. Normalized so a unit-amplitude sinusoid
/// at a bin center reads 10*log10(1/2) = -3.01 dB (its time-domain mean
/// square). Returns an empty list when the signal is shorter than one
/// segment (the not-ready signal).
std::vector<std::pair<double, double>> power_spectrum(
    const Eigen::Ref<const Eigen::VectorXd>& signal, double fs);

inline constexpr Eigen::Index kSpectrumSegment = 4096;

}  // namespace dmcanc
