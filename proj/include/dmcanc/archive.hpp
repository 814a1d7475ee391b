#pragma once

#include <filesystem>

#include "dmcanc/compensation.hpp"
#include "dmcanc/scene.hpp"

namespace dmcanc {

/// Scene and compensation archives share one container: an 8-byte magic, a
/// length-prefixed JSON manifest (K, lengths, fs, blob directory) and raw
/// little-endian float64 tap blobs. Round trips are bit-exact, and externally
/// measured paths can be imported by writing the same layout.

void save_scene(const AcousticScene& scene, const std::filesystem::path& path);
AcousticScene load_scene(const std::filesystem::path& path);

void save_compensation(const CompensationSet& set, const std::filesystem::path& path);
CompensationSet load_compensation(const std::filesystem::path& path);

}  // namespace dmcanc
