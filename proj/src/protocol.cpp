#include "dmcanc/protocol.hpp"

#include <cmath>

#include "dmcanc/errors.hpp"

namespace dmcanc {

TriggerMonitor::TriggerMonitor(double period_s, double fs, double hysteresis_db,
                               double epsilon_floor)
    : window_len_(static_cast<Eigen::Index>(std::llround(period_s * fs))),
      hysteresis_db_(hysteresis_db),
      epsilon_floor_(epsilon_floor) {
  if (window_len_ < 1) throw ConfigError("trigger window must span at least one sample");
  if (!(epsilon_floor > 0.0)) throw ConfigError("RNL floor must be positive");
}

bool TriggerMonitor::push(double e) {
  sum_eta_ += rnl(e, epsilon_floor_);
  if (++count_ < window_len_) return false;
  last_arnl_ = sum_eta_ / static_cast<double>(window_len_);
  sum_eta_ = 0.0;
  count_ = 0;
  return true;
}

bool TriggerMonitor::should_request(double current_arnl) {
  const bool request = prev_arnl_.has_value() && current_arnl > *prev_arnl_ + hysteresis_db_;
  prev_arnl_ = current_arnl;
  return request;
}

Eigen::VectorXd mwd_combine(const ControlFilterState& state_k, const Eigen::VectorXd& own_phi,
                            std::span<const CompensatedGradient> received) {
  const Eigen::Index L_w = state_k.length();
  if (own_phi.size() != L_w) throw ProtocolError("weight difference length mismatch");
  // own_phi is w - w_center, so w_center + own_phi is just w; starting the
  // accumulator from w keeps the no-remote case an exact no-op on the filter.
  Eigen::VectorXd next = state_k.w;
  for (const auto& r : received) {
    if (r.gradient->size() != L_w) throw ProtocolError("weight difference length mismatch");
    next += apply_compensation(*r.gradient, *r.compensation, L_w);
  }
  return next;
}

namespace {

std::vector<Eigen::VectorXd> collect_phi(std::span<const ControlFilterState> nodes) {
  std::vector<Eigen::VectorXd> phi;
  phi.reserve(nodes.size());
  for (const auto& n : nodes) phi.push_back(weight_difference(n));
  return phi;
}

Eigen::VectorXd combine_for(std::span<ControlFilterState> nodes, int k,
                            const std::vector<Eigen::VectorXd>& phi,
                            const CompensationSet& compensation) {
  std::vector<CompensatedGradient> received;
  received.reserve(nodes.size() - 1);
  for (int m = 0; m < static_cast<int>(nodes.size()); ++m) {
    if (m == k) continue;
    received.push_back({&phi[m], &compensation.filter(m, k)});
  }
  return mwd_combine(nodes[k], phi[k], received);
}

}  // namespace

CommEvent execute_async_event(std::span<ControlFilterState> nodes, int requester,
                              const CompensationSet& compensation, TransmitterReset reset) {
  const int K = static_cast<int>(nodes.size());
  if (requester < 0 || requester >= K) throw ProtocolError("requester id out of range");

  auto phi = collect_phi(nodes);
  const Eigen::VectorXd next = combine_for(nodes, requester, phi, compensation);
  nodes[requester].w = next;
  nodes[requester].w_center = next;
  if (reset == TransmitterReset::Reset) {
    // Transmitters fold the sent difference into their center so the same
    // history is never re-added at a later requester.
    for (int m = 0; m < K; ++m)
      if (m != requester) nodes[m].w_center = nodes[m].w;
  }

  CommEvent ev;
  ev.requester = requester;
  ev.policy = PolicyKind::AsyncMwd;
  ev.payloads = std::move(phi);
  return ev;
}

CommEvent execute_sync_event(std::span<ControlFilterState> nodes,
                             const CompensationSet& compensation, int requester_hint) {
  const int K = static_cast<int>(nodes.size());
  auto phi = collect_phi(nodes);  // snapshot before any state is written

  std::vector<Eigen::VectorXd> next(K);
  for (int k = 0; k < K; ++k) next[k] = combine_for(nodes, k, phi, compensation);
  for (int k = 0; k < K; ++k) {
    nodes[k].w = next[k];
    nodes[k].w_center = next[k];
  }

  CommEvent ev;
  ev.requester = requester_hint;
  ev.policy = PolicyKind::SyncMwd;
  ev.payloads = std::move(phi);
  return ev;
}

}  // namespace dmcanc
