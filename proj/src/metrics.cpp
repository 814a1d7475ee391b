#include "dmcanc/metrics.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "dmcanc/errors.hpp"

namespace dmcanc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPowerFloor = 1e-30;

}  // namespace

std::vector<double> anse_series(const Eigen::MatrixXd& errors,
                                const Eigen::MatrixXd& disturbances, Eigen::Index n_avg) {
  if (errors.rows() != disturbances.rows() || errors.cols() != disturbances.cols())
    throw ConfigError("error and disturbance logs must have matching shapes");
  if (n_avg < 1) throw ConfigError("ANSE window must be >= 1");

  const Eigen::Index n = errors.rows();
  const Eigen::Index K = errors.cols();
  std::vector<double> out(static_cast<std::size_t>(n), kNaN);

  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd d2 = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < n; ++i) {
    e2 += errors.row(i).cwiseAbs2().transpose();
    d2 += disturbances.row(i).cwiseAbs2().transpose();
    if (i >= n_avg) {
      e2 -= errors.row(i - n_avg).cwiseAbs2().transpose();
      d2 -= disturbances.row(i - n_avg).cwiseAbs2().transpose();
    }
    if (i < n_avg - 1) continue;
    double acc = 0.0;
    bool defined = true;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (d2[k] <= 0.0) {
        defined = false;
        break;
      }
      acc += 10.0 * std::log10(std::max(e2[k], 0.0) / d2[k] + kPowerFloor);
    }
    out[static_cast<std::size_t>(i)] = defined ? acc / static_cast<double>(K) : kNaN;
  }
  return out;
}

double anse(const RunLog& log, Eigen::Index n, Eigen::Index n_avg) {
  if (n_avg < 1) throw ConfigError("ANSE window must be >= 1");
  if (n < n_avg - 1 || n >= log.errors.rows())
    throw ConfigError("ANSE requested before one full window of samples");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < log.K; ++k) {
    const double e2 = log.errors.col(k).segment(n - n_avg + 1, n_avg).squaredNorm();
    const double d2 = log.disturbances.col(k).segment(n - n_avg + 1, n_avg).squaredNorm();
    if (d2 <= 0.0) return kNaN;
    acc += 10.0 * std::log10(e2 / d2 + kPowerFloor);
  }
  return acc / static_cast<double>(log.K);
}

std::vector<std::pair<double, double>> power_spectrum(
    const Eigen::Ref<const Eigen::VectorXd>& signal, double fs) {
  const Eigen::Index N = kSpectrumSegment;
  if (signal.size() < N) return {};

  using std::numbers::pi;
  Eigen::VectorXd window(N);
  for (Eigen::Index i = 0; i < N; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / N));
  const double wsum = window.sum();

  const Eigen::Index hop = N / 2;
  const Eigen::Index bins = N / 2 + 1;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(bins);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec;
  std::vector<double> seg(static_cast<std::size_t>(N));

  Eigen::Index n_segments = 0;
  for (Eigen::Index start = 0; start + N <= signal.size(); start += hop) {
    for (Eigen::Index i = 0; i < N; ++i) seg[static_cast<std::size_t>(i)] = signal[start + i] * window[i];
    fft.fwd(spec, seg);
    for (Eigen::Index b = 0; b < bins; ++b) {
      const double mag2 = std::norm(spec[static_cast<std::size_t>(b)]);
      const double one_sided = (b == 0 || b == N / 2) ? 1.0 : 2.0;
      acc[b] += one_sided * mag2 / (wsum * wsum);
    }
    ++n_segments;
  }
  acc /= static_cast<double>(n_segments);

  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(bins));
  for (Eigen::Index b = 0; b < bins; ++b) {
    const double freq = static_cast<double>(b) * fs / static_cast<double>(N);
    out.emplace_back(freq, 10.0 * std::log10(std::max(acc[b], kPowerFloor)));
  }
  return out;
}

}  // namespace dmcanc
