#include "dmcanc/scene.hpp"

#include <cmath>
#include <limits>

#include "dmcanc/errors.hpp"
#include "dmcanc/rng.hpp"
#include "dmcanc/signal_ops.hpp"

namespace dmcanc {
namespace {

/// Zero-mean taps starting at `delay`, decaying as exp(-i/tau), rescaled to
/// the requested 2-norm.
Eigen::VectorXd decaying_taps(Rng& rng, Eigen::Index length, Eigen::Index delay, double tau,
                              double norm) {
  Eigen::VectorXd taps = Eigen::VectorXd::Zero(length);
  for (Eigen::Index i = delay; i < length; ++i)
    taps[i] = rng.normal() * std::exp(-static_cast<double>(i - delay) / tau);
  const double raw = taps.norm();
  if (raw > 0.0) taps *= norm / raw;
  return taps;
}

void validate_spec(const PathSynthesisSpec& spec, int K) {
  if (K < 1) throw ConfigError("scene needs K >= 1");
  if (spec.length < 1) throw ConfigError("path length must be >= 1");
  if (spec.delay_min < 0 || spec.delay_max < spec.delay_min)
    throw ConfigError("delay range must satisfy 0 <= delay_min <= delay_max");
  if (spec.delay_max >= spec.length) throw ConfigError("delay_max must be below the path length");
  if (spec.tau <= 0.0) throw ConfigError("decay constant tau must be positive");
  if (!(spec.cross_attenuation > 0.0 && spec.cross_attenuation <= 1.0))
    throw ConfigError("cross_attenuation must lie in (0, 1]");
}

std::vector<ImpulseResponse> draw_primaries(Rng& rng, const PathSynthesisSpec& spec, int K,
                                            Eigen::Index length) {
  // Upper half of the delay range: the disturbance arrives later than the
  // self secondary path, leaving the controller a causal route.
  const Eigen::Index lo = spec.delay_min + (spec.delay_max - spec.delay_min + 1) / 2;
  std::vector<ImpulseResponse> primary;
  primary.reserve(K);
  for (int k = 0; k < K; ++k) {
    const Eigen::Index d = rng.uniform_int(lo, spec.delay_max);
    primary.emplace_back(decaying_taps(rng, length, d, spec.tau, 1.0));
  }
  return primary;
}

}  // namespace

AcousticScene::AcousticScene(double fs, std::vector<ImpulseResponse> primary,
                             std::vector<ImpulseResponse> secondary_true,
                             std::vector<ImpulseResponse> secondary_est)
    : K_(static_cast<int>(primary.size())),
      fs_(fs),
      primary_(std::move(primary)),
      s_true_(std::move(secondary_true)),
      s_est_(std::move(secondary_est)) {
  if (K_ < 1) throw ConfigError("scene needs at least one node");
  if (fs_ <= 0.0) throw ConfigError("scene sampling frequency must be positive");
  const auto kk = static_cast<std::size_t>(K_) * K_;
  if (s_true_.size() != kk || s_est_.size() != kk)
    throw ConfigError("secondary path matrices must be K x K");
  for (const auto& p : primary_)
    if (p.length() != primary_.front().length())
      throw ConfigError("primary paths must share one length");
  for (const auto& s : s_true_)
    if (s.length() != s_true_.front().length())
      throw ConfigError("secondary paths must share one length");
  for (const auto& s : s_est_)
    if (s.length() != s_est_.front().length())
      throw ConfigError("secondary-path estimates must share one length");
}

AcousticScene synthesize_scene(const PathSynthesisSpec& spec, int K, double fs) {
  validate_spec(spec, K);
  Rng rng(spec.seed);

  auto primary = draw_primaries(rng, spec, K, spec.length);

  // Cross paths start strictly after the self paths and carry, per sensor,
  // a combined energy of rho^2 times the self-path energy.
  const double cross_norm =
      K > 1 ? spec.cross_attenuation / std::sqrt(static_cast<double>(K - 1)) : 0.0;
  const Eigen::Index cross_lo = std::min(spec.delay_min + 1, spec.delay_max);
  std::vector<ImpulseResponse> s_true;
  s_true.reserve(static_cast<std::size_t>(K) * K);
  for (int m = 0; m < K; ++m) {
    for (int k = 0; k < K; ++k) {
      if (m == k) {
        s_true.emplace_back(decaying_taps(rng, spec.length, spec.delay_min, spec.tau, 1.0));
      } else {
        const Eigen::Index d = rng.uniform_int(cross_lo, spec.delay_max);
        s_true.emplace_back(decaying_taps(rng, spec.length, d, spec.tau, cross_norm));
      }
    }
  }
  std::vector<ImpulseResponse> s_est = s_true;  // exact estimates by default
  return AcousticScene(fs, std::move(primary), std::move(s_true), std::move(s_est));
}

FactorableScene factorable_scene(const PathSynthesisSpec& spec, int K, double fs,
                                 Eigen::Index L_c) {
  validate_spec(spec, K);
  if (L_c < 1) throw ConfigError("compensation length must be >= 1");
  const Eigen::Index L_self = spec.length - L_c + 1;
  if (L_self < 1 || spec.delay_max >= L_self)
    throw ConfigError("factorable scene needs length >= self-path length + L_c - 1 "
                      "with the delay range inside the self path");

  Rng rng(spec.seed);
  auto primary = draw_primaries(rng, spec, K, spec.length);

  // Self paths with a dominant leading tap: the trailing taps carry at most
  // 80% of its magnitude, which keeps the self-path spectrum bounded away
  // from zero so compensation recovery is well conditioned.
  std::vector<ImpulseResponse> selfs;
  selfs.reserve(K);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd taps = Eigen::VectorXd::Zero(L_self);
    taps[spec.delay_min] = 1.0;
    double tail_abs = 0.0;
    for (Eigen::Index i = spec.delay_min + 1; i < L_self; ++i) {
      taps[i] = rng.normal() * std::exp(-static_cast<double>(i - spec.delay_min) / spec.tau);
      tail_abs += std::abs(taps[i]);
    }
    if (tail_abs > 0.8) taps.tail(L_self - spec.delay_min - 1) *= 0.8 / tail_abs;
    taps /= taps.norm();
    selfs.emplace_back(std::move(taps));
  }

  const double c_norm =
      K > 1 ? spec.cross_attenuation / std::sqrt(static_cast<double>(K - 1)) : 0.0;
  const double tau_c = std::max(1.0, static_cast<double>(L_c) / 3.0);
  CompensationSet generators(K, L_c);
  std::vector<ImpulseResponse> s_true;
  s_true.reserve(static_cast<std::size_t>(K) * K);
  for (int m = 0; m < K; ++m) {
    for (int k = 0; k < K; ++k) {
      if (m == k) {
        Eigen::VectorXd padded = Eigen::VectorXd::Zero(spec.length);
        padded.head(L_self) = selfs[m].taps();
        s_true.emplace_back(std::move(padded));
      } else {
        ImpulseResponse c(decaying_taps(rng, L_c, 0, tau_c, c_norm));
        s_true.push_back(convolve_full(selfs[m], c));  // length is exactly spec.length
        generators.set_filter(m, k, std::move(c));
        generators.set_residual(m, k, 0.0);
      }
    }
  }
  std::vector<ImpulseResponse> s_est = s_true;
  return FactorableScene{
      AcousticScene(fs, std::move(primary), std::move(s_true), std::move(s_est)),
      std::move(generators)};
}

AcousticScene perturb_estimates(const AcousticScene& scene, double mismatch_db,
                                std::uint64_t seed) {
  const int K = scene.node_count();
  std::vector<ImpulseResponse> primary, s_true, s_est;
  for (int k = 0; k < K; ++k) primary.push_back(scene.primary(k));
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k) s_true.push_back(scene.secondary(m, k));

  if (mismatch_db == -std::numeric_limits<double>::infinity()) {
    for (int m = 0; m < K; ++m)
      for (int k = 0; k < K; ++k) s_est.push_back(scene.secondary(m, k));
    return AcousticScene(scene.fs(), std::move(primary), std::move(s_true), std::move(s_est));
  }

  const double ratio = std::pow(10.0, mismatch_db / 20.0);
  Rng rng(seed);
  for (int m = 0; m < K; ++m) {
    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXd& s = scene.secondary(m, k).taps();
      Eigen::VectorXd r(s.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = rng.normal();
      const double rn = r.norm();
      if (s.norm() > 0.0 && rn > 0.0)
        s_est.emplace_back(Eigen::VectorXd(s + (ratio * s.norm() / rn) * r));
      else
        s_est.emplace_back(Eigen::VectorXd(s));
    }
  }
  return AcousticScene(scene.fs(), std::move(primary), std::move(s_true), std::move(s_est));
}

double disturbance(const AcousticScene& scene, int k, const DelayLine& reference_line) {
  return fir_step(reference_line, scene.primary(k));
}

double residual_error(const AcousticScene& scene, int m, double d_m,
                      std::span<const DelayLine> control_lines) {
  if (static_cast<int>(control_lines.size()) != scene.node_count())
    throw ConfigError("residual_error needs one control line per node");
  double anti = 0.0;
  for (int k = 0; k < scene.node_count(); ++k)
    anti += fir_step(control_lines[k], scene.secondary(m, k));
  return d_m - anti;
}

}  // namespace dmcanc
