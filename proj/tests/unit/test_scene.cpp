#include <doctest.h>

#include <limits>
#include <vector>

#include "dmcanc/errors.hpp"
#include "dmcanc/rng.hpp"
#include "dmcanc/scene.hpp"
#include "dmcanc/signal_ops.hpp"
#include "oracles.hpp"

using namespace dmcanc;

namespace {

PathSynthesisSpec small_spec(std::uint64_t seed) {
  PathSynthesisSpec s;
  s.seed = seed;
  s.length = 32;
  s.delay_min = 2;
  s.delay_max = 10;
  s.tau = 8.0;
  s.cross_attenuation = 0.5;
  return s;
}

bool scenes_equal(const AcousticScene& a, const AcousticScene& b) {
  if (a.node_count() != b.node_count()) return false;
  for (int k = 0; k < a.node_count(); ++k)
    if (a.primary(k).taps() != b.primary(k).taps()) return false;
  for (int m = 0; m < a.node_count(); ++m)
    for (int k = 0; k < a.node_count(); ++k)
      if (a.secondary(m, k).taps() != b.secondary(m, k).taps() ||
          a.secondary_estimate(m, k).taps() != b.secondary_estimate(m, k).taps())
        return false;
  return true;
}

}  // namespace

TEST_SUITE("acoustic-scene") {

TEST_CASE("synthesis is deterministic in the seed") {
  const auto spec = small_spec(77);
  CHECK(scenes_equal(synthesize_scene(spec, 3, 16000.0), synthesize_scene(spec, 3, 16000.0)));
}

TEST_CASE("K=1 degenerates to single-channel ANC") {
  const AcousticScene s = synthesize_scene(small_spec(3), 1, 16000.0);
  CHECK(s.node_count() == 1);
  CHECK(s.secondary(0, 0).length() == 32);
}

TEST_CASE("cross coupling energy is bounded by rho^2 of self energy") {
  for (const double rho : {0.9, 0.5, 1e-6}) {
    for (const int K : {2, 3, 6}) {
      auto spec = small_spec(1000 + K);
      spec.cross_attenuation = rho;
      const AcousticScene s = synthesize_scene(spec, K, 16000.0);
      double self = 0.0, cross = 0.0;
      for (int m = 0; m < K; ++m)
        for (int k = 0; k < K; ++k)
          (m == k ? self : cross) += s.secondary(m, k).taps().squaredNorm();
      CHECK(cross <= rho * rho * self * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("self paths lead the cross paths") {
  const AcousticScene s = synthesize_scene(small_spec(8), 3, 16000.0);
  for (int m = 0; m < 3; ++m) {
    CHECK(s.secondary(m, m)[2] != 0.0);  // energy right at delay_min
    for (int k = 0; k < 3; ++k)
      if (k != m)
        for (Eigen::Index i = 0; i <= 2; ++i) CHECK(s.secondary(m, k)[i] == 0.0);
  }
}

TEST_CASE("disturbance is the reference through the primary path") {
  // identity and pure-delay primary paths, then a random-path oracle
  Eigen::VectorXd p_ident(2), p_delay(2);
  p_ident << 1.0, 0.0;
  p_delay << 0.0, 1.0;
  std::vector<ImpulseResponse> primary{ImpulseResponse(p_ident), ImpulseResponse(p_delay)};
  std::vector<ImpulseResponse> sec;
  for (int i = 0; i < 4; ++i) sec.push_back(ImpulseResponse::unit());
  AcousticScene scene(16000.0, primary, sec, sec);

  DelayLine ref(8);
  ref.push(0.3);
  ref.push(0.7);  // history [0.7, 0.3]
  CHECK(disturbance(scene, 0, ref) == 0.7);
  CHECK(disturbance(scene, 1, ref) == 0.3);

  Rng rng(4);
  Eigen::VectorXd p(6);
  for (Eigen::Index i = 0; i < 6; ++i) p[i] = rng.normal();
  std::vector<ImpulseResponse> primary2{ImpulseResponse(p)};
  std::vector<ImpulseResponse> sec2{ImpulseResponse::unit()};
  AcousticScene scene2(16000.0, primary2, sec2, sec2);
  std::vector<double> x(32), pv(p.data(), p.data() + 6);
  for (auto& v : x) v = rng.normal();
  const auto expect = oracle::fir_stream(pv, x);
  DelayLine ref2(6);
  for (std::size_t n = 0; n < x.size(); ++n) {
    ref2.push(x[n]);
    CHECK(std::abs(disturbance(scene2, 0, ref2) - expect[n]) <= 1e-12);
  }
}

TEST_CASE("residual error with silent sources is the disturbance") {
  const AcousticScene s = synthesize_scene(small_spec(5), 2, 16000.0);
  std::vector<DelayLine> y(2, DelayLine(32));
  CHECK(residual_error(s, 0, 0.42, y) == 0.42);
  CHECK(residual_error(s, 1, -1.5, y) == -1.5);
}

TEST_CASE("unit self path cancels a matched disturbance exactly") {
  std::vector<ImpulseResponse> primary{ImpulseResponse::unit()};
  std::vector<ImpulseResponse> sec{ImpulseResponse::unit()};
  AcousticScene scene(16000.0, primary, sec, sec);
  std::vector<DelayLine> y{DelayLine(4)};
  y[0].push(0.9);  // y(n) = d(n) through s = delta
  CHECK(residual_error(scene, 0, 0.9, y) == 0.0);
}

TEST_CASE("residual error matches the batch convolution oracle") {
  const AcousticScene s = synthesize_scene(small_spec(21), 2, 16000.0);
  Rng rng(9);
  std::vector<std::vector<double>> ys(2, std::vector<double>(100));
  for (auto& col : ys)
    for (auto& v : col) v = rng.normal();

  std::vector<std::vector<double>> anti(2, std::vector<double>(100, 0.0));
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) {
      const auto& taps = s.secondary(m, k).taps();
      std::vector<double> tv(taps.data(), taps.data() + taps.size());
      const auto part = oracle::fir_stream(tv, ys[k]);
      for (int n = 0; n < 100; ++n) anti[m][n] += part[n];
    }

  std::vector<DelayLine> lines(2, DelayLine(32));
  for (int n = 0; n < 100; ++n) {
    for (int k = 0; k < 2; ++k) lines[k].push(ys[k][static_cast<std::size_t>(n)]);
    for (int m = 0; m < 2; ++m) {
      const double d = 0.1 * n;
      const double expect = d - anti[m][static_cast<std::size_t>(n)];
      CHECK(std::abs(residual_error(s, m, d, lines) - expect) <= 1e-12);
    }
  }
}

TEST_CASE("residual error is linear in each source history and the disturbance") {
  const AcousticScene s = synthesize_scene(small_spec(31), 2, 16000.0);
  Rng rng(17);
  std::vector<DelayLine> a(2, DelayLine(32)), b(2, DelayLine(32)), sum(2, DelayLine(32));
  for (int n = 0; n < 40; ++n) {
    for (int k = 0; k < 2; ++k) {
      const double xa = rng.normal(), xb = rng.normal();
      a[k].push(xa);
      b[k].push(xb);
      sum[k].push(xa + xb);
    }
  }
  const double da = 0.3, db = -1.1;
  const double ea = residual_error(s, 0, da, a);
  const double eb = residual_error(s, 0, db, b);
  const double es = residual_error(s, 0, da + db, sum);
  CHECK(std::abs(es - (ea + eb)) <= 1e-12);
}

TEST_CASE("factorable scenes satisfy the composition identity tap-exactly") {
  auto spec = small_spec(55);
  spec.length = 40;  // self length 32 with L_c = 9
  const auto f = factorable_scene(spec, 3, 16000.0, 9);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k) {
      if (m == k) continue;
      const auto composed = convolve_full(
          Eigen::VectorXd(f.scene.secondary(m, m).taps().head(32)),
          f.generators.filter(m, k).taps());
      CHECK((composed - f.scene.secondary(m, k).taps()).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("factorable scene rejects an impossible length budget") {
  auto spec = small_spec(1);
  spec.length = 8;  // self length would be 0 with L_c = 9
  CHECK_THROWS_AS(factorable_scene(spec, 2, 16000.0, 9), ConfigError);
}

TEST_CASE("estimate perturbation hits the requested mismatch") {
  const AcousticScene s = synthesize_scene(small_spec(66), 2, 16000.0);
  const double inf = std::numeric_limits<double>::infinity();

  const AcousticScene none = perturb_estimates(s, -inf, 3);
  CHECK(scenes_equal(none, perturb_estimates(none, -inf, 4)));  // idempotent
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k)
      CHECK(none.secondary_estimate(m, k).taps() == s.secondary(m, k).taps());

  const AcousticScene p = perturb_estimates(s, -20.0, 3);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) {
      const double rel = (p.secondary_estimate(m, k).taps() - s.secondary(m, k).taps()).norm() /
                         s.secondary(m, k).norm();
      CHECK(std::abs(rel - 0.1) <= 1e-12);
    }
}

}  // TEST_SUITE
