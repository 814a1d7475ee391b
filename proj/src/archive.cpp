#include "dmcanc/archive.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <vector>

#include "dmcanc/errors.hpp"

namespace dmcanc {
namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'M', 'C', 'A', 'N', 'C', 'A', '1'};

void write_archive(const std::filesystem::path& path, const json& manifest,
                   const std::vector<const Eigen::VectorXd*>& blobs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write archive: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::string m = manifest.dump();
  const std::uint64_t len = m.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(m.data(), static_cast<std::streamsize>(m.size()));
  for (const Eigen::VectorXd* b : blobs)
    out.write(reinterpret_cast<const char*>(b->data()),
              static_cast<std::streamsize>(b->size() * sizeof(double)));
  if (!out) throw IoError("short write on archive: " + path.string());
}

struct Archive {
  json manifest;
  std::vector<double> payload;
  std::size_t cursor = 0;

  Eigen::VectorXd take(std::size_t count, const std::filesystem::path& path) {
    if (cursor + count > payload.size())
      throw IoError("archive payload truncated: " + path.string());
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(payload.data() + cursor,
                                                          static_cast<Eigen::Index>(count));
    cursor += count;
    return v;
  }
};

Archive read_archive(const std::filesystem::path& path, const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a dmcanc archive: " + path.string());
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in) throw IoError("archive manifest truncated: " + path.string());
  std::string m(len, '\0');
  in.read(m.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("archive manifest truncated: " + path.string());

  Archive a;
  try {
    a.manifest = json::parse(m);
  } catch (const json::exception& e) {
    throw IoError("archive manifest is not valid JSON: " + std::string(e.what()));
  }
  if (a.manifest.value("kind", "") != expected_kind)
    throw IoError("archive " + path.string() + " holds '" + a.manifest.value("kind", "?") +
                  "', expected '" + expected_kind + "'");

  std::vector<char> rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (rest.size() % sizeof(double) != 0)
    throw IoError("archive payload is not a whole number of float64: " + path.string());
  a.payload.resize(rest.size() / sizeof(double));
  std::memcpy(a.payload.data(), rest.data(), rest.size());
  return a;
}

}  // namespace

void save_scene(const AcousticScene& scene, const std::filesystem::path& path) {
  const int K = scene.node_count();
  json manifest{{"kind", "scene"},
                {"K", K},
                {"fs", scene.fs()},
                {"primary_length", scene.primary_length()},
                {"secondary_length", scene.secondary_length()},
                {"estimate_length", scene.estimate_length()}};
  std::vector<const Eigen::VectorXd*> blobs;
  for (int k = 0; k < K; ++k) blobs.push_back(&scene.primary(k).taps());
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k) blobs.push_back(&scene.secondary(m, k).taps());
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k) blobs.push_back(&scene.secondary_estimate(m, k).taps());
  write_archive(path, manifest, blobs);
}

AcousticScene load_scene(const std::filesystem::path& path) {
  Archive a = read_archive(path, "scene");
  const int K = a.manifest.at("K").get<int>();
  const double fs = a.manifest.at("fs").get<double>();
  const auto lp = a.manifest.at("primary_length").get<std::size_t>();
  const auto ls = a.manifest.at("secondary_length").get<std::size_t>();
  const auto le = a.manifest.at("estimate_length").get<std::size_t>();
  if (K < 1) throw IoError("scene archive has K < 1: " + path.string());

  std::vector<ImpulseResponse> primary, s_true, s_est;
  for (int k = 0; k < K; ++k) primary.emplace_back(a.take(lp, path));
  for (int i = 0; i < K * K; ++i) s_true.emplace_back(a.take(ls, path));
  for (int i = 0; i < K * K; ++i) s_est.emplace_back(a.take(le, path));
  return AcousticScene(fs, std::move(primary), std::move(s_true), std::move(s_est));
}

void save_compensation(const CompensationSet& set, const std::filesystem::path& path) {
  const int K = set.node_count();
  json residuals = json::array();
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k)
      if (m != k) residuals.push_back(set.residual(m, k));
  json manifest{{"kind", "compensation"},
                {"K", K},
                {"L_c", set.filter_length()},
                {"residuals", residuals}};
  std::vector<const Eigen::VectorXd*> blobs;
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k)
      if (m != k) blobs.push_back(&set.filter(m, k).taps());
  write_archive(path, manifest, blobs);
}

CompensationSet load_compensation(const std::filesystem::path& path) {
  Archive a = read_archive(path, "compensation");
  const int K = a.manifest.at("K").get<int>();
  const auto lc = a.manifest.at("L_c").get<std::size_t>();
  CompensationSet set(K, static_cast<Eigen::Index>(lc));
  const auto& residuals = a.manifest.at("residuals");
  std::size_t idx = 0;
  for (int m = 0; m < K; ++m) {
    for (int k = 0; k < K; ++k) {
      if (m == k) continue;
      set.set_filter(m, k, ImpulseResponse(a.take(lc, path)));
      set.set_residual(m, k, residuals.at(idx++).get<double>());
    }
  }
  return set;
}

}  // namespace dmcanc
