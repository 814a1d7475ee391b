#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dmcanc/delay_line.hpp"
#include "dmcanc/impulse_response.hpp"
#include "dmcanc/rng.hpp"

namespace dmcanc {

enum class NoiseKind { BandpassWhite, TonalMixture, FileStream };
enum class FileEndPolicy { Loop, Stop };

struct Tone {
  double freq_hz = 0.0;
  double amplitude = 1.0;
  double phase_rad = 0.0;
};

struct NoiseSpec {
  NoiseKind kind = NoiseKind::BandpassWhite;
  double band_low_hz = 100.0;   // bandpass only
  double band_high_hz = 1000.0; // bandpass only
  std::uint64_t seed = 1;
  double amplitude = 1.0;
  std::vector<Tone> tones;            // tonal mixture only
  std::string file_path;              // file stream only
  FileEndPolicy end_policy = FileEndPolicy::Loop;
};

/// Linear-phase windowed-sinc bandpass (Blackman window, odd tap count).
ImpulseResponse design_bandpass_fir(double low_hz, double high_hz, double fs,
                                    Eigen::Index num_taps = 255);

/// Deterministic primary-noise generator. Equal (kind, parameters, seed)
/// yields a bit-identical stream across runs.
class NoiseSource {
 public:
  NoiseSource(const NoiseSpec& spec, double fs);

  /// Next sample. nullopt only for an exhausted file stream under the Stop
  /// policy, which ends a simulation cleanly.
  std::optional<double> next();

  const NoiseSpec& spec() const { return spec_; }
  double fs() const { return fs_; }

 private:
  NoiseSpec spec_;
  double fs_;
  Rng rng_;
  std::int64_t n_ = 0;
  // bandpass state
  std::unique_ptr<ImpulseResponse> bandpass_;
  std::unique_ptr<DelayLine> white_line_;
  // file state
  Eigen::VectorXd file_samples_;
  Eigen::Index file_pos_ = 0;
};

}  // namespace dmcanc
