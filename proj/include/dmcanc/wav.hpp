#pragma once

#include <Eigen/Dense>
#include <filesystem>

namespace dmcanc {

struct WavData {
  double sample_rate = 0.0;
  Eigen::VectorXd samples;  // mono, PCM16 scaled by 1/32768
};

/// Reads a mono WAV file. Supported encodings: 16-bit PCM and 32-bit IEEE
/// float. Anything else (stereo, other bit depths, compressed) is an IoError;
/// no resampling is attempted here.
WavData load_wav_mono(const std::filesystem::path& path);

}  // namespace dmcanc
