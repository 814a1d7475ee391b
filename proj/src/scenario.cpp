#include "dmcanc/scenario.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "dmcanc/errors.hpp"

namespace dmcanc {
namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

Eigen::VectorXd per_node(const json& v, int K, const std::string& where) {
  Eigen::VectorXd out(K);
  if (v.is_number()) {
    out.setConstant(v.get<double>());
  } else if (v.is_array()) {
    if (static_cast<int>(v.size()) != K)
      throw ConfigError(where + " array must carry one value per node");
    for (int k = 0; k < K; ++k) out[k] = v.at(k).get<double>();
  } else {
    throw ConfigError(where + " must be a number or an array of K numbers");
  }
  return out;
}

NoiseSpec parse_noise(const json& j, const std::string& where) {
  require_keys(j, where, {"kind", "band", "seed", "amplitude", "tones", "path", "end_policy"});
  NoiseSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bandpass-white") {
    spec.kind = NoiseKind::BandpassWhite;
    const auto& band = j.at("band");
    if (!band.is_array() || band.size() != 2)
      throw ConfigError(where + ".band must be [low_hz, high_hz]");
    spec.band_low_hz = band.at(0).get<double>();
    spec.band_high_hz = band.at(1).get<double>();
  } else if (kind == "tonal-mixture") {
    spec.kind = NoiseKind::TonalMixture;
    for (const auto& t : j.at("tones")) {
      require_keys(t, where + ".tones[]", {"freq_hz", "amplitude", "phase_rad"});
      spec.tones.push_back({t.at("freq_hz").get<double>(), t.value("amplitude", 1.0),
                            t.value("phase_rad", 0.0)});
    }
  } else if (kind == "file-stream") {
    spec.kind = NoiseKind::FileStream;
    spec.file_path = j.at("path").get<std::string>();
    const std::string policy = j.value("end_policy", "loop");
    if (policy == "loop") spec.end_policy = FileEndPolicy::Loop;
    else if (policy == "stop") spec.end_policy = FileEndPolicy::Stop;
    else throw ConfigError(where + ".end_policy must be 'loop' or 'stop'");
  } else {
    throw ConfigError(where + ".kind must be bandpass-white, tonal-mixture or file-stream");
  }
  spec.seed = j.value("seed", std::uint64_t{1});
  spec.amplitude = j.value("amplitude", 1.0);
  return spec;
}

void parse_entry_fields(const json& j, SimConfig& cfg, const std::string& where) {
  if (j.contains("algorithm"))
    cfg.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  if (j.contains("mu")) cfg.mu = per_node(j.at("mu"), cfg.K, where + ".mu");
  if (j.contains("alpha")) cfg.alpha = per_node(j.at("alpha"), cfg.K, where + ".alpha");
  if (j.contains("trigger")) {
    require_keys(j.at("trigger"), where + ".trigger", {"T", "hysteresis_db"});
    cfg.trigger_period_s = j.at("trigger").value("T", cfg.trigger_period_s);
    cfg.hysteresis_db = j.at("trigger").value("hysteresis_db", cfg.hysteresis_db);
  }
  if (j.contains("comm")) {
    require_keys(j.at("comm"), where + ".comm", {"transmitter_reset", "link_delay_samples"});
    const std::string reset = j.at("comm").value("transmitter_reset", "reset");
    if (reset == "reset") cfg.transmitter_reset = TransmitterReset::Reset;
    else if (reset == "keep") cfg.transmitter_reset = TransmitterReset::Keep;
    else throw ConfigError(where + ".comm.transmitter_reset must be 'reset' or 'keep'");
    cfg.link_delay_samples = j.at("comm").value("link_delay_samples", 0);
  }
}

}  // namespace

const char* to_string(AlgorithmKind a) { return algorithm_name(a); }

AlgorithmKind algorithm_from_string(const std::string& s) {
  if (s == "NoControl") return AlgorithmKind::NoControl;
  if (s == "FxLMS-no-comm") return AlgorithmKind::FxlmsNoComm;
  if (s == "WCFxLMS-no-comm") return AlgorithmKind::WcfxlmsNoComm;
  if (s == "MEFxLMS") return AlgorithmKind::MEFxLMS;
  if (s == "MGDFxLMS") return AlgorithmKind::MGDFxLMS;
  if (s == "SCDMCANC") return AlgorithmKind::SCDMCANC;
  if (s == "ACDMCANC") return AlgorithmKind::ACDMCANC;
  throw ConfigError("unknown algorithm '" + s + "'");
}

Scenario parse_scenario(const json& doc) {
  require_keys(doc, "scenario",
               {"name", "fs", "duration_s", "K", "lengths", "scene", "compensation", "noise",
                "algorithm", "mu", "alpha", "trigger", "comm", "anse_window", "outputs",
                "campaign"});

  Scenario scenario;
  scenario.name = doc.value("name", "scenario");

  SimConfig base;
  base.K = doc.at("K").get<int>();
  base.fs = doc.at("fs").get<double>();
  base.duration_s = doc.at("duration_s").get<double>();

  const auto& lengths = doc.at("lengths");
  require_keys(lengths, "lengths", {"L_w", "L_s", "L_c"});
  base.L_w = lengths.at("L_w").get<Eigen::Index>();
  base.L_c = lengths.at("L_c").get<Eigen::Index>();
  const auto L_s = lengths.at("L_s").get<Eigen::Index>();

  const auto& scene = doc.at("scene");
  require_keys(scene, "scene",
               {"source", "seed", "delay_min", "delay_max", "tau", "rho", "path"});
  const std::string source = scene.at("source").get<std::string>();
  if (source == "synthesize") base.scene.kind = SceneSource::Kind::Synthesize;
  else if (source == "factorable") base.scene.kind = SceneSource::Kind::Factorable;
  else if (source == "file") base.scene.kind = SceneSource::Kind::File;
  else throw ConfigError("scene.source must be synthesize, factorable or file");
  if (base.scene.kind == SceneSource::Kind::File) {
    base.scene.path = scene.at("path").get<std::string>();
  } else {
    base.scene.synthesis.seed = scene.value("seed", std::uint64_t{1});
    base.scene.synthesis.length = L_s;
    base.scene.synthesis.delay_min = scene.value("delay_min", Eigen::Index{8});
    base.scene.synthesis.delay_max = scene.value("delay_max", Eigen::Index{40});
    base.scene.synthesis.tau = scene.value("tau", 48.0);
    base.scene.synthesis.cross_attenuation = scene.value("rho", 0.5);
  }

  if (doc.contains("compensation")) {
    const auto& comp = doc.at("compensation");
    require_keys(comp, "compensation", {"source", "path"});
    const std::string cs = comp.value("source", "train");
    if (cs == "train") base.comp_source = CompensationSource::Train;
    else if (cs == "exact") base.comp_source = CompensationSource::Exact;
    else if (cs == "file") base.comp_source = CompensationSource::File;
    else throw ConfigError("compensation.source must be train, exact or file");
    if (base.comp_source == CompensationSource::File)
      base.comp_path = comp.at("path").get<std::string>();
  }

  base.noise = parse_noise(doc.at("noise"), "noise");
  base.anse_window = doc.value("anse_window", Eigen::Index{5000});

  // defaults before entry-level overrides
  base.mu = Eigen::VectorXd::Constant(base.K, 1e-6);
  base.alpha = Eigen::VectorXd::Constant(base.K, 0.0);
  parse_entry_fields(doc, base, "scenario");

  if (doc.contains("outputs")) {
    const auto& out = doc.at("outputs");
    require_keys(out, "outputs", {"log_decimate", "spectrum"});
    scenario.outputs.log_decimate = out.value("log_decimate", 1);
    scenario.outputs.spectrum = out.value("spectrum", false);
    if (scenario.outputs.log_decimate < 1)
      throw ConfigError("outputs.log_decimate must be >= 1");
  }

  if (doc.contains("campaign")) {
    for (const auto& entry : doc.at("campaign")) {
      require_keys(entry, "campaign[]",
                   {"label", "algorithm", "mu", "alpha", "trigger", "comm"});
      CampaignEntry e;
      e.config = base;
      parse_entry_fields(entry, e.config, "campaign[]");
      e.label = entry.value("label", std::string(algorithm_name(e.config.algorithm)));
      scenario.entries.push_back(std::move(e));
    }
  } else {
    scenario.entries.push_back({std::string(algorithm_name(base.algorithm)), base});
  }
  if (scenario.entries.empty()) throw ConfigError("campaign must not be empty");

  for (const auto& e : scenario.entries) validate_config(e.config);
  return scenario;
}

Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("scenario file is not valid JSON: " + std::string(e.what()));
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_scenario(doc);
}

void apply_override(json& doc, const std::string& key_eq_value) {
  const auto eq = key_eq_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key.path=value: " + key_eq_value);
  const std::string path = key_eq_value.substr(0, eq);
  const std::string value = key_eq_value.substr(eq + 1);

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override has an empty path segment: " + key_eq_value);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string resolved_config_json(const Scenario& scenario, const CampaignEntry& entry) {
  const SimConfig& c = entry.config;
  json j;
  j["scenario"] = scenario.name;
  j["label"] = entry.label;
  j["K"] = c.K;
  j["fs"] = c.fs;
  j["duration_s"] = c.duration_s;
  j["lengths"] = {{"L_w", c.L_w}, {"L_c", c.L_c}};
  switch (c.scene.kind) {
    case SceneSource::Kind::Synthesize:
    case SceneSource::Kind::Factorable: {
      j["scene"] = {{"source", c.scene.kind == SceneSource::Kind::Factorable ? "factorable"
                                                                             : "synthesize"},
                    {"seed", c.scene.synthesis.seed},
                    {"L_s", c.scene.synthesis.length},
                    {"delay_min", c.scene.synthesis.delay_min},
                    {"delay_max", c.scene.synthesis.delay_max},
                    {"tau", c.scene.synthesis.tau},
                    {"rho", c.scene.synthesis.cross_attenuation}};
      break;
    }
    case SceneSource::Kind::File:
      j["scene"] = {{"source", "file"}, {"path", c.scene.path}};
      break;
  }
  switch (c.comp_source) {
    case CompensationSource::Train: j["compensation"] = {{"source", "train"}}; break;
    case CompensationSource::Exact: j["compensation"] = {{"source", "exact"}}; break;
    case CompensationSource::File:
      j["compensation"] = {{"source", "file"}, {"path", c.comp_path}};
      break;
  }
  switch (c.noise.kind) {
    case NoiseKind::BandpassWhite:
      j["noise"] = {{"kind", "bandpass-white"},
                    {"band", {c.noise.band_low_hz, c.noise.band_high_hz}},
                    {"seed", c.noise.seed},
                    {"amplitude", c.noise.amplitude}};
      break;
    case NoiseKind::TonalMixture: {
      json tones = json::array();
      for (const auto& t : c.noise.tones)
        tones.push_back({{"freq_hz", t.freq_hz},
                         {"amplitude", t.amplitude},
                         {"phase_rad", t.phase_rad}});
      j["noise"] = {{"kind", "tonal-mixture"}, {"tones", tones},
                    {"seed", c.noise.seed}, {"amplitude", c.noise.amplitude}};
      break;
    }
    case NoiseKind::FileStream:
      j["noise"] = {{"kind", "file-stream"},
                    {"path", c.noise.file_path},
                    {"end_policy", c.noise.end_policy == FileEndPolicy::Stop ? "stop" : "loop"},
                    {"seed", c.noise.seed},
                    {"amplitude", c.noise.amplitude}};
      break;
  }
  j["algorithm"] = algorithm_name(c.algorithm);
  j["mu"] = std::vector<double>(c.mu.data(), c.mu.data() + c.mu.size());
  j["alpha"] = std::vector<double>(c.alpha.data(), c.alpha.data() + c.alpha.size());
  j["trigger"] = {{"T", c.trigger_period_s}, {"hysteresis_db", c.hysteresis_db}};
  j["comm"] = {{"transmitter_reset",
                c.transmitter_reset == TransmitterReset::Reset ? "reset" : "keep"},
               {"link_delay_samples", c.link_delay_samples}};
  j["anse_window"] = c.anse_window;
  j["outputs"] = {{"log_decimate", scenario.outputs.log_decimate},
                  {"spectrum", scenario.outputs.spectrum}};
  return j.dump();  // nlohmann objects keep keys sorted, so this is canonical
}

std::string config_hash(const std::string& canonical_json) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical_json) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace dmcanc
