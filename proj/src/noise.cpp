#include "dmcanc/noise.hpp"

#include <cmath>
#include <numbers>

#include "dmcanc/errors.hpp"
#include "dmcanc/signal_ops.hpp"
#include "dmcanc/wav.hpp"

namespace dmcanc {

ImpulseResponse design_bandpass_fir(double low_hz, double high_hz, double fs,
                                    Eigen::Index num_taps) {
  if (!(0.0 < low_hz && low_hz < high_hz && high_hz < fs / 2.0))
    throw ConfigError("bandpass band must satisfy 0 < low < high < fs/2");
  if (num_taps < 3 || num_taps % 2 == 0)
    throw ConfigError("bandpass tap count must be odd and >= 3");

  using std::numbers::pi;
  const double f1 = low_hz / fs;
  const double f2 = high_hz / fs;
  const Eigen::Index mid = (num_taps - 1) / 2;
  Eigen::VectorXd h(num_taps);
  for (Eigen::Index i = 0; i < num_taps; ++i) {
    const double m = static_cast<double>(i - mid);
    double ideal;
    if (i == mid) {
      ideal = 2.0 * (f2 - f1);
    } else {
      ideal = (std::sin(2.0 * pi * f2 * m) - std::sin(2.0 * pi * f1 * m)) / (pi * m);
    }
    // Blackman window: ~74 dB stopband, enough margin for the 40 dB
    // out-of-band requirement at 255 taps.
    const double x = static_cast<double>(i) / static_cast<double>(num_taps - 1);
    const double w = 0.42 - 0.5 * std::cos(2.0 * pi * x) + 0.08 * std::cos(4.0 * pi * x);
    h[i] = ideal * w;
  }
  return ImpulseResponse(std::move(h));
}

NoiseSource::NoiseSource(const NoiseSpec& spec, double fs)
    : spec_(spec), fs_(fs), rng_(spec.seed) {
  if (fs <= 0.0) throw ConfigError("sampling frequency must be positive");
  switch (spec_.kind) {
    case NoiseKind::BandpassWhite: {
      bandpass_ = std::make_unique<ImpulseResponse>(
          design_bandpass_fir(spec_.band_low_hz, spec_.band_high_hz, fs));
      white_line_ = std::make_unique<DelayLine>(bandpass_->length());
      break;
    }
    case NoiseKind::TonalMixture: {
      if (spec_.tones.empty()) throw ConfigError("tonal mixture needs at least one tone");
      break;
    }
    case NoiseKind::FileStream: {
      if (spec_.file_path.empty()) throw ConfigError("file-stream noise needs a file path");
      const WavData wav = load_wav_mono(spec_.file_path);
      if (wav.sample_rate != fs_)
        throw ConfigError("WAV sample rate " + std::to_string(wav.sample_rate) +
                          " does not match configured fs " + std::to_string(fs_) +
                          " (resampling is not performed)");
      if (wav.samples.size() == 0) throw ConfigError("WAV file holds no samples");
      file_samples_ = wav.samples;
      break;
    }
  }
}

std::optional<double> NoiseSource::next() {
  switch (spec_.kind) {
    case NoiseKind::BandpassWhite: {
      white_line_->push(rng_.normal());
      ++n_;
      return spec_.amplitude * fir_step(*white_line_, *bandpass_);
    }
    case NoiseKind::TonalMixture: {
      using std::numbers::pi;
      double s = 0.0;
      for (const Tone& t : spec_.tones) {
        // fmod keeps the argument small so long runs do not lose phase accuracy
        const double cycles = std::fmod(static_cast<double>(n_) * (t.freq_hz / fs_), 1.0);
        s += t.amplitude * std::sin(2.0 * pi * cycles + t.phase_rad);
      }
      ++n_;
      return spec_.amplitude * s;
    }
    case NoiseKind::FileStream: {
      if (file_pos_ >= file_samples_.size()) {
        if (spec_.end_policy == FileEndPolicy::Stop) return std::nullopt;
        file_pos_ = 0;
      }
      ++n_;
      return spec_.amplitude * file_samples_[file_pos_++];
    }
  }
  return std::nullopt;  // unreachable
}

}  // namespace dmcanc
