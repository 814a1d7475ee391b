#include "dmcanc/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "dmcanc/errors.hpp"

namespace dmcanc {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

WavData load_wav_mono(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IoError("not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = read_u32(chunk + 4);
    const unsigned char* body = chunk + 8;
    if (pos + 8 + len > bytes.size()) throw IoError("truncated WAV chunk in " + path.string());
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw IoError("malformed fmt chunk in " + path.string());
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data == nullptr) throw IoError("WAV missing fmt or data chunk: " + path.string());
  if (channels != 1) throw IoError("WAV must be mono: " + path.string());

  WavData out;
  out.sample_rate = static_cast<double>(rate);
  if (format == 1 && bits == 16) {
    const Eigen::Index n = data_len / 2;
    out.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto u = static_cast<std::uint16_t>(data[2 * i] | (data[2 * i + 1] << 8));
      out.samples[i] = static_cast<std::int16_t>(u) / 32768.0;
    }
  } else if (format == 3 && bits == 32) {
    const Eigen::Index n = data_len / 4;
    out.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, data + 4 * i, 4);
      out.samples[i] = static_cast<double>(v);
    }
  } else {
    throw IoError("unsupported WAV encoding (need PCM16 or float32 mono): " + path.string());
  }
  return out;
}

}  // namespace dmcanc
