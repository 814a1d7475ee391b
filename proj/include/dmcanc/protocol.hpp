#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dmcanc/compensation.hpp"
#include "dmcanc/control.hpp"

namespace dmcanc {

/// Floor applied to e^2 before the log so silent sensors read a finite level.
inline constexpr double kRnlFloor = 1e-30;

/// Residual noise level in dB: 10*log10(max(e^2, floor)).
inline double rnl(double e, double epsilon_floor = kRnlFloor) {
  return 10.0 * std::log10(std::max(e * e, epsilon_floor));
}

/// Per-node communication-request logic: accumulates RNL samples over
/// non-overlapping windows of round(T*fs) samples, reports each completed
/// window's average (ARNL), and requests communication when a window is
/// worse than the previous one. No request can fire in the first window
/// since there is no baseline yet.
class TriggerMonitor {
 public:
  TriggerMonitor(double period_s, double fs, double hysteresis_db = 0.0,
                 double epsilon_floor = kRnlFloor);

  /// Adds one residual sample; returns true when this sample completed a
  /// window (exactly once per window).
  bool push(double e);

  /// ARNL of the most recently completed window; empty before the first
  /// window completes (the not-ready signal).
  std::optional<double> arnl() const { return last_arnl_; }

  /// Applies the trigger rule for a completed window: request iff a baseline
  /// exists and current_arnl exceeds it by more than the hysteresis. The
  /// baseline advances to current_arnl regardless of the decision.
  bool should_request(double current_arnl);

  std::optional<double> previous_arnl() const { return prev_arnl_; }
  Eigen::Index window_len() const { return window_len_; }
  double epsilon_floor() const { return epsilon_floor_; }

 private:
  Eigen::Index window_len_;
  double hysteresis_db_;
  double epsilon_floor_;
  Eigen::Index count_ = 0;
  double sum_eta_ = 0.0;
  std::optional<double> last_arnl_;
  std::optional<double> prev_arnl_;
};

enum class PolicyKind { None, PerSampleGradient, SyncMwd, AsyncMwd };

/// Whether transmitters fold their sent weight difference into their own
/// center point (preventing the same phi from being re-sent to a later
/// requester) or keep it pending.
enum class TransmitterReset { Reset, Keep };

struct CommPolicy {
  PolicyKind kind = PolicyKind::None;
  TransmitterReset transmitter_reset = TransmitterReset::Reset;
  double hysteresis_db = 0.0;
  int link_delay_samples = 0;  // hook only; 0 means apply in the same sample
};

/// Record of one weight-difference exchange. For async events the requester
/// is the single node that asked; for sync events every node combines and
/// the lowest triggering node id is recorded.
struct CommEvent {
  std::int64_t sample_index = 0;
  double time_s = 0.0;
  int requester = -1;
  PolicyKind policy = PolicyKind::AsyncMwd;
  std::vector<Eigen::VectorXd> payloads;  // phi_m per node, length L_w
};

/// phi_k = w_k(n+1) - w_center_k, evaluated after the sample's update.
inline Eigen::VectorXd weight_difference(const ControlFilterState& state) {
  return state.w - state.w_center;
}

/// Mixed weight difference: w_center_k + phi_k + sum_{m != k} T_c(phi_m),
/// where own_phi must be this node's current weight difference (so the first
/// two terms are the node's filter, which is how they are evaluated: a node
/// with no peers keeps its filter bit-exactly). The caller assigns the result
/// to BOTH w_k and w_center_k.
Eigen::VectorXd mwd_combine(const ControlFilterState& state_k,
                            const Eigen::VectorXd& own_phi,
                            std::span<const CompensatedGradient> received);

/// Asynchronous event at `requester`: every node's phi is collected, the
/// requester alone applies the MWD combination (snapping w = w_center to the
/// result), transmitters are reset or kept per policy, and everyone else's
/// WCFxLMS iteration continues untouched.
CommEvent execute_async_event(std::span<ControlFilterState> nodes, int requester,
                              const CompensationSet& compensation, TransmitterReset reset);

/// Synchronous event: all phi are snapshotted first, then every node applies
/// the MWD combination from that same snapshot and snaps w = w_center.
CommEvent execute_sync_event(std::span<ControlFilterState> nodes,
                             const CompensationSet& compensation, int requester_hint);

}  // namespace dmcanc
