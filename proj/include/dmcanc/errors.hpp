#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dmcanc {

/// Invalid sizes, rates or parameter combinations. The CLI maps this to exit 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed inter-node payloads (length mismatches between gradients,
/// weight differences and compensation filters).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed files (scene archives, WAV, scenario documents).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite sample or weight appeared during a run. Carries the node and
/// sample index so the failure is attributable. The CLI maps this to exit 3.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, int node, std::int64_t sample)
      : std::runtime_error(what + " (node " + std::to_string(node) +
                           ", sample " + std::to_string(sample) + ")"),
        node_(node),
        sample_(sample) {}

  int node() const { return node_; }
  std::int64_t sample() const { return sample_; }

 private:
  int node_;
  std::int64_t sample_;
};

}  // namespace dmcanc
