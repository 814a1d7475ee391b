#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "dmcanc/metrics.hpp"
#include "dmcanc/noise.hpp"
#include "dmcanc/protocol.hpp"
#include "dmcanc/scene.hpp"

namespace dmcanc {

enum class AlgorithmKind {
  NoControl,      // weights pinned at zero; ANSE normalization baseline
  FxlmsNoComm,    // per-node FxLMS, no penalty, no communication
  WcfxlmsNoComm,  // per-node WCFxLMS, no communication
  MEFxLMS,        // centralized multiple-error baseline
  MGDFxLMS,       // distributed, gradients exchanged every sample
  SCDMCANC,       // WCFxLMS + synchronous MWD events
  ACDMCANC        // WCFxLMS + asynchronous MWD events
};

PolicyKind policy_kind(AlgorithmKind algorithm);
const char* algorithm_name(AlgorithmKind algorithm);

struct SceneSource {
  enum class Kind { Synthesize, Factorable, File };
  Kind kind = Kind::Synthesize;
  PathSynthesisSpec synthesis;  // Synthesize/Factorable; .length is L_s
  std::string path;             // File
};

enum class CompensationSource {
  Train,  // least-squares fit from the scene estimates
  Exact,  // the generating filters of a factorable scene
  File    // a saved compensation archive
};

struct SimConfig {
  SceneSource scene;
  CompensationSource comp_source = CompensationSource::Train;
  std::string comp_path;

  int K = 2;
  Eigen::Index L_w = 128;
  Eigen::Index L_c = 17;
  double fs = 16000.0;

  NoiseSpec noise;
  AlgorithmKind algorithm = AlgorithmKind::ACDMCANC;
  TransmitterReset transmitter_reset = TransmitterReset::Reset;
  double hysteresis_db = 0.0;
  int link_delay_samples = 0;

  Eigen::VectorXd mu;     // per node, size K
  Eigen::VectorXd alpha;  // per node, size K

  double trigger_period_s = 0.3;  // T; also the weight-norm snapshot stride
  double duration_s = 1.0;
  Eigen::Index anse_window = 5000;
  double rnl_floor = kRnlFloor;

  // When false, a non-finite sample stops the run and marks the log instead
  // of throwing NumericError; used by divergence studies.
  bool halt_on_nonfinite = true;
};

/// Fills per-node mu/alpha vectors from scalars and checks the config.
void validate_config(const SimConfig& config);

AcousticScene resolve_scene(const SimConfig& config);
CompensationSet resolve_compensation(const SimConfig& config, const AcousticScene& scene);
bool needs_compensation(const SimConfig& config);

/// Runs the per-sample loop: reference generation, disturbance through the
/// primary paths, control outputs, residuals, filtered references, the
/// algorithm update and window-boundary trigger handling. Deterministic:
/// identical configs produce identical logs.
RunLog run_scenario(const SimConfig& config, const AcousticScene& scene,
                    const CompensationSet* compensation);

/// Convenience overload resolving the scene and compensation internally.
RunLog run_scenario(const SimConfig& config);

}  // namespace dmcanc
