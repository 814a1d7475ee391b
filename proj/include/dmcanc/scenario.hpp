#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "dmcanc/simulation.hpp"

namespace dmcanc {

struct OutputOptions {
  int log_decimate = 1;    // keep every Nth sample in the run-log CSV
  bool spectrum = false;   // also write residual power spectra
};

struct CampaignEntry {
  std::string label;
  SimConfig config;
};

/// A scenario document: one scene and one noise seed shared by every campaign
/// entry, so the resulting curves are directly comparable.
struct Scenario {
  std::string name;
  OutputOptions outputs;
  std::vector<CampaignEntry> entries;
};

/// Parses a scenario document. Unknown keys anywhere are rejected; scalars
/// for mu/alpha are broadcast per node.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path,
                       const std::vector<std::string>& overrides = {});

/// Applies "dotted.path=value" onto the raw document; value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& key_eq_value);

/// Fully-resolved entry configuration, serialized with sorted keys; echoed
/// into every output header so results carry their provenance.
std::string resolved_config_json(const Scenario& scenario, const CampaignEntry& entry);

/// FNV-1a 64-bit over the canonical config string, as 16 hex digits.
std::string config_hash(const std::string& canonical_json);

const char* to_string(AlgorithmKind a);
AlgorithmKind algorithm_from_string(const std::string& s);

}  // namespace dmcanc
