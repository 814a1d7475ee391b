#include "dmcanc/csv.hpp"

#include <charconv>
#include <fstream>

#include "dmcanc/errors.hpp"

namespace dmcanc {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_header(std::ofstream& out, const RunLog& log, const char* what) {
  out << "# dmcanc " << what << "\n";
  if (!log.config_hash.empty()) out << "# config_hash: " << log.config_hash << "\n";
  if (!log.resolved_config_json.empty()) out << "# config: " << log.resolved_config_json << "\n";
}

const char* policy_label(PolicyKind p) {
  switch (p) {
    case PolicyKind::None: return "none";
    case PolicyKind::PerSampleGradient: return "per-sample-gradient";
    case PolicyKind::SyncMwd: return "sync";
    case PolicyKind::AsyncMwd: return "async";
  }
  return "?";
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_run_log_csv(const std::filesystem::path& path, const RunLog& log, int decimate) {
  if (decimate < 1) throw ConfigError("log decimation must be >= 1");
  auto out = open_out(path);
  write_header(out, log, "run log");
  out << "# fs: " << format_double(log.fs) << "\n";
  out << "# anse_window: " << log.anse_window << "\n";
  if (log.ended_early) out << "# ended_early: true\n";
  if (log.nonfinite_abort)
    out << "# nonfinite_abort: node " << log.nonfinite_abort->first << " sample "
        << log.nonfinite_abort->second << "\n";

  out << "sample,time_s";
  for (int k = 0; k < log.K; ++k) out << ",d_" << k;
  for (int k = 0; k < log.K; ++k) out << ",e_" << k;
  out << ",anse_db\n";

  std::string line;
  for (std::int64_t n = 0; n < log.n_samples; n += decimate) {
    line.clear();
    line += std::to_string(n);
    line += ',';
    line += format_double(static_cast<double>(n) / log.fs);
    for (int k = 0; k < log.K; ++k) {
      line += ',';
      line += format_double(log.disturbances(n, k));
    }
    for (int k = 0; k < log.K; ++k) {
      line += ',';
      line += format_double(log.errors(n, k));
    }
    line += ',';
    line += format_double(log.anse_db[static_cast<std::size_t>(n)]);
    line += '\n';
    out << line;
  }
}

void write_event_csv(const std::filesystem::path& path, const RunLog& log) {
  auto out = open_out(path);
  write_header(out, log, "communication events");
  out << "# comm_event_count: " << log.comm_event_count << "\n";
  out << "sample_index,time_s,requester_id,policy";
  for (int k = 0; k < log.K; ++k) out << ",phi_norm_" << k;
  out << "\n";
  for (const CommEvent& ev : log.events) {
    out << ev.sample_index << ',' << format_double(ev.time_s) << ',' << ev.requester << ','
        << policy_label(ev.policy);
    for (const auto& phi : ev.payloads) out << ',' << format_double(phi.norm());
    out << "\n";
  }
}

void write_weights_csv(const std::filesystem::path& path, const RunLog& log) {
  auto out = open_out(path);
  write_header(out, log, "final weights");
  out << "node,tap,weight,center\n";
  for (int k = 0; k < log.K; ++k) {
    const auto& w = log.final_weights[static_cast<std::size_t>(k)];
    const auto& c = log.final_centers[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < w.size(); ++i)
      out << k << ',' << i << ',' << format_double(w[i]) << ',' << format_double(c[i]) << "\n";
  }
}

void write_spectrum_csv(const std::filesystem::path& path, const RunLog& log) {
  auto out = open_out(path);
  write_header(out, log, "residual power spectrum");
  out << "# estimator: averaged periodogram, segment " << kSpectrumSegment
      << ", 50% overlap, periodic Hann, one-sided; a unit sinusoid at a bin "
         "center reads -3.01 dB\n";

  const Eigen::Index half = log.errors.rows() / 2;
  const Eigen::Index len = log.errors.rows() - half;
  std::vector<std::vector<std::pair<double, double>>> specs;
  for (int k = 0; k < log.K; ++k)
    specs.push_back(power_spectrum(log.errors.col(k).segment(half, len), log.fs));
  if (specs.empty() || specs.front().empty()) {
    out << "# not ready: run shorter than one spectrum segment\n";
    return;
  }

  Eigen::VectorXd mean_e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(specs[0].size()));
  for (const auto& s : specs)
    for (std::size_t b = 0; b < s.size(); ++b)
      mean_e[static_cast<Eigen::Index>(b)] += std::pow(10.0, s[b].second / 10.0);
  mean_e /= static_cast<double>(log.K);

  Eigen::VectorXd mean_d = Eigen::VectorXd::Zero(mean_e.size());
  for (int k = 0; k < log.K; ++k) {
    const auto s = power_spectrum(log.disturbances.col(k).segment(half, len), log.fs);
    for (std::size_t b = 0; b < s.size(); ++b)
      mean_d[static_cast<Eigen::Index>(b)] += std::pow(10.0, s[b].second / 10.0);
  }
  mean_d /= static_cast<double>(log.K);

  out << "freq_hz";
  for (int k = 0; k < log.K; ++k) out << ",e_" << k << "_db";
  out << ",e_mean_db,d_mean_db\n";
  for (std::size_t b = 0; b < specs[0].size(); ++b) {
    out << format_double(specs[0][b].first);
    for (int k = 0; k < log.K; ++k) out << ',' << format_double(specs[static_cast<std::size_t>(k)][b].second);
    out << ',' << format_double(10.0 * std::log10(mean_e[static_cast<Eigen::Index>(b)]));
    out << ',' << format_double(10.0 * std::log10(mean_d[static_cast<Eigen::Index>(b)]));
    out << "\n";
  }
}

}  // namespace dmcanc
