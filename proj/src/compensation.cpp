#include "dmcanc/compensation.hpp"

#include <cstdlib>
#include <string>

#include "dmcanc/scene.hpp"
#include "dmcanc/signal_ops.hpp"

namespace dmcanc {
namespace {

/// Autocorrelation r(l) = sum_n s[n] s[n+l] for l = 0 .. L_c-1.
Eigen::VectorXd autocorrelation(const Eigen::VectorXd& s, Eigen::Index lags) {
  Eigen::VectorXd r(lags);
  for (Eigen::Index l = 0; l < lags; ++l) {
    const Eigen::Index n = s.size() - l;
    r[l] = n > 0 ? s.head(n).dot(s.tail(n)) : 0.0;
  }
  return r;
}

}  // namespace

CompensationSet estimate_compensation(const AcousticScene& scene, Eigen::Index L_c) {
  const int K = scene.node_count();
  CompensationSet set(K, L_c);

  for (int m = 0; m < K; ++m) {
    const Eigen::VectorXd& s = scene.secondary_estimate(m, m).taps();
    if (s.norm() == 0.0)
      throw ConfigError("self secondary-path estimate (" + std::to_string(m) + "," +
                        std::to_string(m) + ") is identically zero; system is singular");

    // The Gram of the convolution operator of s is Toeplitz in its
    // autocorrelation; build it once per sensor and reuse for every k.
    const Eigen::VectorXd r = autocorrelation(s, L_c);
    Eigen::MatrixXd gram(L_c, L_c);
    for (Eigen::Index i = 0; i < L_c; ++i)
      for (Eigen::Index j = 0; j < L_c; ++j) gram(i, j) = r[std::abs(i - j)];
    const double lambda = 1e-10 * r[0];  // r(0) is the autocorrelation peak
    gram.diagonal().array() += lambda;
    const Eigen::LDLT<Eigen::MatrixXd> solver(gram);

    for (int k = 0; k < K; ++k) {
      if (k == m) continue;
      const Eigen::VectorXd& b = scene.secondary_estimate(m, k).taps();
      Eigen::VectorXd rhs(L_c);
      for (Eigen::Index i = 0; i < L_c; ++i) {
        const Eigen::Index n = b.size() - i;
        rhs[i] = n > 0 ? b.tail(n).dot(s.head(n)) : 0.0;
      }
      Eigen::VectorXd c = solver.solve(rhs);

      // Residual recomputed by direct convolution, over the full padded
      // support of s * c.
      Eigen::VectorXd fit = convolve_full(s, c);
      fit.head(b.size()) -= b;
      set.set_filter(m, k, ImpulseResponse(std::move(c)));
      set.set_residual(m, k, fit.norm());
    }
  }
  return set;
}

}  // namespace dmcanc
