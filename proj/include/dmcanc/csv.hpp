#pragma once

#include <filesystem>
#include <string>

#include "dmcanc/metrics.hpp"

namespace dmcanc {

/// CSV outputs share a header block: comment lines carrying the resolved
/// config and its hash, then a column header, then the rows. Floats are
/// written with std::to_chars (shortest round-trip form), so re-running an
/// identical config reproduces the files byte for byte.

void write_run_log_csv(const std::filesystem::path& path, const RunLog& log, int decimate = 1);
void write_event_csv(const std::filesystem::path& path, const RunLog& log);
void write_weights_csv(const std::filesystem::path& path, const RunLog& log);

/// Residual power spectra over the final half of the run, one column per
/// node plus their mean and the mean disturbance spectrum.
void write_spectrum_csv(const std::filesystem::path& path, const RunLog& log);

/// Shortest round-trip decimal form of a double ("nan"/"inf" spelled out).
std::string format_double(double v);

}  // namespace dmcanc
