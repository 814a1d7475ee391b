#include "dmcanc/simulation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>

#include "dmcanc/archive.hpp"
#include "dmcanc/control.hpp"
#include "dmcanc/errors.hpp"

namespace dmcanc {

PolicyKind policy_kind(AlgorithmKind algorithm) {
  switch (algorithm) {
    case AlgorithmKind::MGDFxLMS: return PolicyKind::PerSampleGradient;
    case AlgorithmKind::SCDMCANC: return PolicyKind::SyncMwd;
    case AlgorithmKind::ACDMCANC: return PolicyKind::AsyncMwd;
    default: return PolicyKind::None;
  }
}

const char* algorithm_name(AlgorithmKind algorithm) {
  switch (algorithm) {
    case AlgorithmKind::NoControl: return "NoControl";
    case AlgorithmKind::FxlmsNoComm: return "FxLMS-no-comm";
    case AlgorithmKind::WcfxlmsNoComm: return "WCFxLMS-no-comm";
    case AlgorithmKind::MEFxLMS: return "MEFxLMS";
    case AlgorithmKind::MGDFxLMS: return "MGDFxLMS";
    case AlgorithmKind::SCDMCANC: return "SCDMCANC";
    case AlgorithmKind::ACDMCANC: return "ACDMCANC";
  }
  return "?";
}

bool needs_compensation(const SimConfig& config) {
  const PolicyKind p = policy_kind(config.algorithm);
  return config.K > 1 && p != PolicyKind::None;
}

void validate_config(const SimConfig& config) {
  if (config.K < 1) throw ConfigError("K must be >= 1");
  if (config.L_w < 1) throw ConfigError("L_w must be >= 1");
  if (config.L_c < 1) throw ConfigError("L_c must be >= 1");
  if (config.fs <= 0.0) throw ConfigError("fs must be positive");
  if (config.duration_s <= 0.0) throw ConfigError("duration must be positive");
  const double n = config.duration_s * config.fs;
  if (std::abs(n - std::llround(n)) > 1e-6)
    throw ConfigError("duration * fs must be an integer sample count");
  if (config.anse_window < 1) throw ConfigError("ANSE window must be >= 1");
  if (config.mu.size() != config.K || config.alpha.size() != config.K)
    throw ConfigError("mu and alpha must carry one value per node");
  if (config.algorithm != AlgorithmKind::NoControl) {
    const bool uses_penalty = config.algorithm == AlgorithmKind::WcfxlmsNoComm ||
                              config.algorithm == AlgorithmKind::SCDMCANC ||
                              config.algorithm == AlgorithmKind::ACDMCANC;
    for (int k = 0; k < config.K; ++k) {
      if (!(config.mu[k] > 0.0)) throw ConfigError("mu must be positive");
      if (!(config.alpha[k] >= 0.0)) throw ConfigError("alpha must be >= 0");
      if (uses_penalty && config.mu[k] * config.alpha[k] >= 1.0)
        throw ConfigError("mu * alpha must be < 1");
    }
  }
  if (config.link_delay_samples < 0) throw ConfigError("link delay must be >= 0");
  if (std::llround(config.trigger_period_s * config.fs) < 1)
    throw ConfigError("trigger period T must span at least one sample");
}

AcousticScene resolve_scene(const SimConfig& config) {
  switch (config.scene.kind) {
    case SceneSource::Kind::Synthesize:
      return synthesize_scene(config.scene.synthesis, config.K, config.fs);
    case SceneSource::Kind::Factorable:
      return factorable_scene(config.scene.synthesis, config.K, config.fs, config.L_c).scene;
    case SceneSource::Kind::File: {
      AcousticScene scene = load_scene(config.scene.path);
      if (scene.node_count() != config.K)
        throw ConfigError("scene archive has K=" + std::to_string(scene.node_count()) +
                          " but the config says K=" + std::to_string(config.K));
      if (scene.fs() != config.fs)
        throw ConfigError("scene archive fs does not match the configured fs");
      return scene;
    }
  }
  throw ConfigError("unknown scene source");
}

CompensationSet resolve_compensation(const SimConfig& config, const AcousticScene& scene) {
  switch (config.comp_source) {
    case CompensationSource::Train:
      return estimate_compensation(scene, config.L_c);
    case CompensationSource::Exact: {
      if (config.scene.kind != SceneSource::Kind::Factorable)
        throw ConfigError("exact compensation is only available for factorable scenes");
      return factorable_scene(config.scene.synthesis, config.K, config.fs, config.L_c)
          .generators;
    }
    case CompensationSource::File: {
      CompensationSet set = load_compensation(config.comp_path);
      if (set.node_count() != config.K)
        throw ConfigError("compensation archive K does not match the config");
      return set;
    }
  }
  throw ConfigError("unknown compensation source");
}

namespace {

struct PendingEvent {
  std::int64_t apply_at;
  int requester;  // -1 for sync
  std::vector<Eigen::VectorXd> next_filters;
  CommEvent record;
};

std::vector<Eigen::VectorXd> collect_phi(std::span<const ControlFilterState> nodes) {
  std::vector<Eigen::VectorXd> phi;
  phi.reserve(nodes.size());
  for (const auto& node : nodes) phi.push_back(weight_difference(node));
  return phi;
}

Eigen::VectorXd combine_from_snapshot(std::span<ControlFilterState> nodes, int k,
                                      const std::vector<Eigen::VectorXd>& phi,
                                      const CompensationSet& comp) {
  std::vector<CompensatedGradient> received;
  received.reserve(nodes.size() - 1);
  for (int m = 0; m < static_cast<int>(nodes.size()); ++m)
    if (m != k) received.push_back({&phi[m], &comp.filter(m, k)});
  return mwd_combine(nodes[k], phi[k], received);
}

// Link-delay hook: the combined filter is computed when the exchange is
// initiated (transmitters reset then, too) and installed apply_at samples
// later.
PendingEvent make_delayed_async(std::span<ControlFilterState> nodes, int requester,
                                const CompensationSet& comp, const SimConfig& config,
                                std::int64_t n) {
  auto phi = collect_phi(nodes);
  PendingEvent p;
  p.apply_at = n + config.link_delay_samples;
  p.requester = requester;
  p.next_filters.push_back(combine_from_snapshot(nodes, requester, phi, comp));
  if (config.transmitter_reset == TransmitterReset::Reset) {
    for (int m = 0; m < static_cast<int>(nodes.size()); ++m)
      if (m != requester) nodes[m].w_center = nodes[m].w;
  }
  p.record.sample_index = n;
  p.record.time_s = static_cast<double>(n) / config.fs;
  p.record.requester = requester;
  p.record.policy = PolicyKind::AsyncMwd;
  p.record.payloads = std::move(phi);
  return p;
}

PendingEvent make_delayed_sync(std::span<ControlFilterState> nodes,
                               const CompensationSet& comp, const SimConfig& config,
                               std::int64_t n, int requester_hint) {
  auto phi = collect_phi(nodes);
  PendingEvent p;
  p.apply_at = n + config.link_delay_samples;
  p.requester = -1;
  for (int k = 0; k < static_cast<int>(nodes.size()); ++k)
    p.next_filters.push_back(combine_from_snapshot(nodes, k, phi, comp));
  p.record.sample_index = n;
  p.record.time_s = static_cast<double>(n) / config.fs;
  p.record.requester = requester_hint;
  p.record.policy = PolicyKind::SyncMwd;
  p.record.payloads = std::move(phi);
  return p;
}

}  // namespace

RunLog run_scenario(const SimConfig& config) {
  validate_config(config);
  const AcousticScene scene = resolve_scene(config);
  if (needs_compensation(config)) {
    const CompensationSet comp = resolve_compensation(config, scene);
    return run_scenario(config, scene, &comp);
  }
  return run_scenario(config, scene, nullptr);
}

RunLog run_scenario(const SimConfig& config, const AcousticScene& scene,
                    const CompensationSet* compensation) {
  validate_config(config);
  const int K = config.K;
  if (scene.node_count() != K) throw ConfigError("scene node count does not match the config");
  if (needs_compensation(config)) {
    if (compensation == nullptr)
      throw ConfigError("the selected algorithm needs a compensation set");
    if (compensation->node_count() != K)
      throw ConfigError("compensation node count does not match the config");
  }

  const AlgorithmKind algo = config.algorithm;
  const PolicyKind policy = policy_kind(algo);
  const auto n_total = static_cast<std::int64_t>(std::llround(config.duration_s * config.fs));
  const auto window_len =
      static_cast<std::int64_t>(std::llround(config.trigger_period_s * config.fs));
  const Eigen::Index L_w = config.L_w;
  const Eigen::Index L_ext =
      L_w + (compensation != nullptr ? compensation->filter_length() : config.L_c) - 1;

  NoiseSource noise(config.noise, config.fs);

  // Node state. FxLMS-no-comm is WCFxLMS with a zero penalty; the no-control
  // baseline never updates, so its mu/alpha are immaterial.
  std::vector<ControlFilterState> states;
  std::vector<TriggerMonitor> monitors;
  const bool inert = algo == AlgorithmKind::NoControl;
  for (int k = 0; k < K; ++k) {
    const double mu = inert ? 1.0 : config.mu[k];
    const double alpha =
        (inert || algo == AlgorithmKind::FxlmsNoComm) ? 0.0 : config.alpha[k];
    states.push_back(make_control_state(L_w, mu, alpha));
    monitors.emplace_back(config.trigger_period_s, config.fs, config.hysteresis_db,
                          config.rnl_floor);
  }

  const Eigen::Index ref_capacity =
      std::max({L_w, scene.primary_length(), scene.estimate_length()});
  DelayLine ref_line(ref_capacity);
  std::vector<DelayLine> y_lines(static_cast<std::size_t>(K),
                                 DelayLine(scene.secondary_length()));
  const bool full_bank = algo == AlgorithmKind::MEFxLMS && K > 1;
  FilteredReferenceBank bank(K, L_ext,
                             full_bank ? FilteredReferenceBank::Layout::Full
                                       : FilteredReferenceBank::Layout::Diagonal);

  RunLog log;
  log.fs = config.fs;
  log.K = K;
  log.anse_window = config.anse_window;
  log.errors.resize(n_total, K);
  log.disturbances.resize(n_total, K);

  std::vector<double> y(static_cast<std::size_t>(K));
  std::vector<double> d(static_cast<std::size_t>(K));
  std::vector<double> e(static_cast<std::size_t>(K));
  std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(K));
  std::vector<CompensatedGradient> received;
  received.reserve(static_cast<std::size_t>(K));
  std::deque<PendingEvent> pending;
  std::vector<Eigen::VectorXd> norm_rows;
  std::vector<std::int64_t> norm_samples;

  auto nonfinite = [&](int node, std::int64_t sample, const char* what) -> bool {
    if (config.halt_on_nonfinite) throw NumericError(std::string("non-finite ") + what, node, sample);
    log.nonfinite_abort = {node, sample};
    return true;
  };

  std::int64_t n = 0;
  for (; n < n_total; ++n) {
#ifndef NDEBUG
    int stage = 0;
    auto audit = [&stage](int s) {  // pipeline-order audit: stages may not run out of order
      assert(s == stage + 1);
      stage = s;
    };
#else
    auto audit = [](int) {};
#endif

    // 1. reference
    audit(1);
    const std::optional<double> xs = noise.next();
    if (!xs.has_value()) {
      log.ended_early = true;
      break;
    }
    const double x = *xs;
    if (!std::isfinite(x)) {
      if (nonfinite(-1, n, "reference sample")) break;
    }
    ref_line.push(x);

    // 2. control outputs from the current weights
    audit(2);
    for (int k = 0; k < K; ++k) {
      y[k] = control_output(states[k], ref_line);
      y_lines[k].push(y[k]);
    }

    // 3. acoustics: disturbances and residuals
    audit(3);
    bool aborted = false;
    for (int m = 0; m < K; ++m) d[m] = disturbance(scene, m, ref_line);
    for (int m = 0; m < K; ++m) {
      e[m] = residual_error(scene, m, d[m], y_lines);
      if (!std::isfinite(e[m])) {
        aborted = nonfinite(m, n, "error sample");
        break;
      }
      log.errors(n, m) = e[m];
      log.disturbances(n, m) = d[m];
    }
    if (aborted) break;

    // 4. filtered references
    audit(4);
    if (full_bank) {
      for (int k = 0; k < K; ++k)
        for (int m = 0; m < K; ++m)
          bank.line(k, m).push(filtered_reference_step(ref_line, scene.secondary_estimate(m, k)));
    } else {
      for (int k = 0; k < K; ++k)
        bank.line(k, k).push(filtered_reference_step(ref_line, scene.secondary_estimate(k, k)));
    }

    // 5. adaptation
    audit(5);
    switch (algo) {
      case AlgorithmKind::NoControl:
        break;
      case AlgorithmKind::MEFxLMS:
        mefxlms_update(states, bank, e);
        break;
      case AlgorithmKind::MGDFxLMS: {
        // Extended gradients (lead-in history of L_c - 1 samples) make the
        // compensation transport edge-free, which is what lets this match
        // the centralized update exactly on factorable scenes.
        for (int m = 0; m < K; ++m)
          grads[m] = (states[m].mu * e[m]) * bank.line(m, m).window(L_ext);
        for (int k = 0; k < K; ++k) {
          received.clear();
          for (int m = 0; m < K; ++m)
            if (m != k) received.push_back({&grads[m], &compensation->filter(m, k)});
          mgdfxlms_update(states[k], grads[k], received);
        }
        log.comm_event_count += 1;  // one exchange round per sample
        break;
      }
      default:
        for (int k = 0; k < K; ++k) wcfxlms_update(states[k], bank.line(k, k), e[k]);
        break;
    }

    // 6. window boundaries: pending payloads, triggers, norm snapshots
    audit(6);
    while (!pending.empty() && pending.front().apply_at == n) {
      PendingEvent ev = std::move(pending.front());
      pending.pop_front();
      if (ev.requester >= 0) {
        states[ev.requester].w = ev.next_filters[0];
        states[ev.requester].w_center = ev.next_filters[0];
      } else {
        for (int k = 0; k < K; ++k) {
          states[k].w = ev.next_filters[k];
          states[k].w_center = ev.next_filters[k];
        }
      }
      log.events.push_back(std::move(ev.record));
    }

    if (policy == PolicyKind::SyncMwd || policy == PolicyKind::AsyncMwd) {
      bool window_done = false;
      for (int k = 0; k < K; ++k) window_done = monitors[k].push(e[k]);
      if (window_done) {
        std::vector<int> requesters;
        for (int k = 0; k < K; ++k)
          if (monitors[k].should_request(*monitors[k].arnl())) requesters.push_back(k);

        if (policy == PolicyKind::AsyncMwd) {
          for (int k : requesters) {  // ascending id: the collision tie-break
            if (config.link_delay_samples == 0) {
              CommEvent ev = execute_async_event(states, k, *compensation,
                                                 config.transmitter_reset);
              ev.sample_index = n;
              ev.time_s = static_cast<double>(n) / config.fs;
              log.events.push_back(std::move(ev));
            } else {
              pending.push_back(make_delayed_async(states, k, *compensation, config, n));
            }
            log.comm_event_count += 1;
          }
        } else if (!requesters.empty()) {
          if (config.link_delay_samples == 0) {
            CommEvent ev = execute_sync_event(states, *compensation, requesters.front());
            ev.sample_index = n;
            ev.time_s = static_cast<double>(n) / config.fs;
            log.events.push_back(std::move(ev));
          } else {
            pending.push_back(make_delayed_sync(states, *compensation, config, n,
                                                requesters.front()));
          }
          log.comm_event_count += 1;
        }
      }
    }

    if ((n + 1) % window_len == 0) {
      Eigen::VectorXd norms(K);
      for (int k = 0; k < K; ++k) {
        if (!states[k].w.allFinite()) {
          if (nonfinite(k, n, "control weights")) break;
        }
        norms[k] = states[k].w.norm();
      }
      if (log.nonfinite_abort.has_value()) break;
      norm_rows.push_back(std::move(norms));
      norm_samples.push_back(n);
    }
  }

  const std::int64_t produced = std::min(n, n_total);
  if (produced < n_total) {
    log.errors.conservativeResize(produced, K);
    log.disturbances.conservativeResize(produced, K);
  }
  log.n_samples = produced;
  log.anse_db = anse_series(log.errors, log.disturbances, config.anse_window);
  for (int k = 0; k < K; ++k) {
    log.final_weights.push_back(states[k].w);
    log.final_centers.push_back(states[k].w_center);
  }
  log.weight_norm_history.resize(static_cast<Eigen::Index>(norm_rows.size()), K);
  for (std::size_t i = 0; i < norm_rows.size(); ++i)
    log.weight_norm_history.row(static_cast<Eigen::Index>(i)) = norm_rows[i].transpose();
  log.weight_norm_samples = std::move(norm_samples);
  return log;
}

}  // namespace dmcanc
