#include <doctest.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dmcanc/errors.hpp"
#include "dmcanc/metrics.hpp"
#include "dmcanc/noise.hpp"
#include "dmcanc/wav.hpp"
#include "wav_fixture.hpp"

using namespace dmcanc;
using testfix::write_wav;

namespace {

std::filesystem::path tmp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "dmcanc_noise_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("tonal mixture starts at zero phase") {
  NoiseSpec spec;
  spec.kind = NoiseKind::TonalMixture;
  spec.tones = {{100.0, 1.0, 0.0}};
  NoiseSource src(spec, 16000.0);
  CHECK(*src.next() == 0.0);  // sin(0)
  CHECK(*src.next() != 0.0);
}

TEST_CASE("bandpass white noise is bit-identical for equal seeds") {
  NoiseSpec spec;  // defaults: bandpass 100-1000, seed 1
  spec.seed = 42;
  NoiseSource a(spec, 16000.0);
  NoiseSource b(spec, 16000.0);
  for (int n = 0; n < 1000; ++n) CHECK(*a.next() == *b.next());
}

TEST_CASE("noise streams of a million samples stay identical") {
  NoiseSpec spec;
  spec.seed = 20240901;
  NoiseSource a(spec, 16000.0);
  NoiseSource b(spec, 16000.0);
  bool same = true;
  for (int n = 0; n < 1000000 && same; ++n) same = (*a.next() == *b.next());
  CHECK(same);
}

TEST_CASE("bandpass rejection is at least 40 dB out of band") {
  NoiseSpec spec;
  spec.band_low_hz = 100.0;
  spec.band_high_hz = 1000.0;
  spec.seed = 5;
  const double fs = 16000.0;
  NoiseSource src(spec, fs);
  Eigen::VectorXd x(1 << 16);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = *src.next();

  const auto spec_est = power_spectrum(x, fs);
  REQUIRE(!spec_est.empty());
  const double tol_band = 200.0;
  double in_band = 0.0, out_band = 0.0;
  for (const auto& [freq, db] : spec_est) {
    const double p = std::pow(10.0, db / 10.0);
    if (freq >= spec.band_low_hz && freq <= spec.band_high_hz) in_band += p;
    else if (freq < spec.band_low_hz - tol_band || freq > spec.band_high_hz + tol_band)
      out_band += p;
  }
  CHECK(in_band > 0.0);
  CHECK(10.0 * std::log10(out_band / in_band) <= -40.0);
}

TEST_CASE("bandpass design rejects bad parameters") {
  CHECK_THROWS_AS(design_bandpass_fir(0.0, 1000.0, 16000.0), ConfigError);
  CHECK_THROWS_AS(design_bandpass_fir(1000.0, 100.0, 16000.0), ConfigError);
  CHECK_THROWS_AS(design_bandpass_fir(100.0, 9000.0, 16000.0), ConfigError);
  CHECK_THROWS_AS(design_bandpass_fir(100.0, 1000.0, 16000.0, 64), ConfigError);
}

TEST_CASE("file stream honors loop and stop policies") {
  const auto path = tmp_dir() / "short.wav";
  write_wav(path, {0.5f, -0.25f, 0.125f}, 16000, true);

  NoiseSpec spec;
  spec.kind = NoiseKind::FileStream;
  spec.file_path = path.string();
  spec.end_policy = FileEndPolicy::Stop;
  NoiseSource stop(spec, 16000.0);
  CHECK(*stop.next() == doctest::Approx(0.5));
  CHECK(stop.next().has_value());
  CHECK(stop.next().has_value());
  CHECK(!stop.next().has_value());  // exhausted: clean end

  spec.end_policy = FileEndPolicy::Loop;
  NoiseSource loop(spec, 16000.0);
  for (int i = 0; i < 7; ++i) CHECK(loop.next().has_value());
  CHECK(*loop.next() == doctest::Approx(-0.25));  // 8th sample wraps to index 1
}

TEST_CASE("file stream requires a matching sample rate") {
  const auto path = tmp_dir() / "rate.wav";
  write_wav(path, {0.1f, 0.2f}, 8000, false);
  NoiseSpec spec;
  spec.kind = NoiseKind::FileStream;
  spec.file_path = path.string();
  CHECK_THROWS_AS(NoiseSource(spec, 16000.0), ConfigError);
}

TEST_CASE("wav reader handles PCM16 and rejects stereo") {
  const auto path = tmp_dir() / "pcm.wav";
  write_wav(path, {0.5f, -0.5f}, 44100, false);
  const WavData wav = load_wav_mono(path);
  CHECK(wav.sample_rate == 44100.0);
  REQUIRE(wav.samples.size() == 2);
  CHECK(wav.samples[0] == doctest::Approx(0.5).epsilon(1e-3));

  // hand-build a stereo header
  std::ofstream out(tmp_dir() / "stereo.wav", std::ios::binary);
  out.write("RIFF\x24\x00\x00\x00WAVEfmt \x10\x00\x00\x00\x01\x00\x02\x00", 28);
  out.write("\x80\x3e\x00\x00\x00\xfa\x00\x00\x04\x00\x10\x00data\x00\x00\x00\x00", 20);
  out.close();
  CHECK_THROWS_AS(load_wav_mono(tmp_dir() / "stereo.wav"), IoError);
  CHECK_THROWS_AS(load_wav_mono(tmp_dir() / "missing.wav"), IoError);
}

}  // TEST_SUITE
