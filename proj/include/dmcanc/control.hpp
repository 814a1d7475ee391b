#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "dmcanc/compensation.hpp"
#include "dmcanc/delay_line.hpp"
#include "dmcanc/errors.hpp"
#include "dmcanc/impulse_response.hpp"
#include "dmcanc/signal_ops.hpp"

namespace dmcanc {

/// One node's adaptive state: the control filter w, the constrained center
/// point w_center it is tethered to, and the node's step size / penalty.
struct ControlFilterState {
  Eigen::VectorXd w;
  Eigen::VectorXd w_center;
  double mu = 0.0;
  double alpha = 0.0;

  Eigen::Index length() const { return w.size(); }
};

inline ControlFilterState make_control_state(Eigen::Index L_w, double mu, double alpha) {
  if (L_w < 1) throw ConfigError("control filter length must be >= 1");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("step size mu must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("penalty alpha must be >= 0");
  return ControlFilterState{Eigen::VectorXd::Zero(L_w), Eigen::VectorXd::Zero(L_w), mu, alpha};
}

/// y_k(n): inner product of w with the most recent L_w reference samples.
inline double control_output(const ControlFilterState& state, const DelayLine& reference_line) {
  if (reference_line.capacity() < state.length())
    throw ConfigError("reference line shorter than the control filter");
  return state.w.dot(reference_line.window(state.length()));
}

/// x'_km(n): one sample of the reference filtered through s_hat_mk. The
/// caller pushes the result into the matching bank line.
inline double filtered_reference_step(const DelayLine& x_line, const ImpulseResponse& s_hat_mk) {
  return fir_step(x_line, s_hat_mk);
}

/// Per-(k,m) delay lines of filtered-reference samples. Decentralized
/// algorithms only need the diagonal x'_kk; the centralized update needs all
/// K^2 lines.
class FilteredReferenceBank {
 public:
  enum class Layout { Diagonal, Full };

  FilteredReferenceBank(int K, Eigen::Index capacity, Layout layout)
      : K_(K), layout_(layout) {
    if (K < 1) throw ConfigError("bank needs K >= 1");
    const int n = layout == Layout::Full ? K * K : K;
    lines_.reserve(n);
    for (int i = 0; i < n; ++i) lines_.emplace_back(capacity);
  }

  DelayLine& line(int k, int m) { return lines_[index(k, m)]; }
  const DelayLine& line(int k, int m) const { return lines_[index(k, m)]; }

  int node_count() const { return K_; }
  Layout layout() const { return layout_; }

 private:
  std::size_t index(int k, int m) const {
    if (k < 0 || k >= K_ || m < 0 || m >= K_) throw ConfigError("bank index out of range");
    if (layout_ == Layout::Diagonal) {
      if (k != m) throw ConfigError("bank holds only diagonal filtered-reference lines");
      return static_cast<std::size_t>(k);
    }
    return static_cast<std::size_t>(k) * K_ + m;
  }

  int K_;
  Layout layout_;
  std::vector<DelayLine> lines_;
};

/// Local gradient of node k: mu * e_k * [x'_kk(n) ... x'_kk(n-L_w+1)].
/// The step size lives inside the gradient; consumers must not scale again.
inline Eigen::VectorXd local_gradient(const ControlFilterState& state,
                                      const DelayLine& xprime_kk_line, double e_k) {
  if (xprime_kk_line.capacity() < state.length())
    throw ConfigError("filtered-reference line shorter than the control filter");
  return (state.mu * e_k) * xprime_kk_line.window(state.length());
}

/// Centralized multiple-error update: w_k += mu_k * sum_m x'_km(n) e_m(n).
/// Center points are untouched; the centralized baseline has none.
inline void mefxlms_update(std::span<ControlFilterState> states,
                           const FilteredReferenceBank& bank, std::span<const double> errors) {
  const int K = static_cast<int>(states.size());
  if (bank.layout() != FilteredReferenceBank::Layout::Full && K > 1)
    throw ConfigError("centralized update needs the full filtered-reference bank");
  if (static_cast<int>(errors.size()) != K) throw ConfigError("one error sample per node required");
  for (int k = 0; k < K; ++k) {
    ControlFilterState& s = states[k];
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(s.length());
    for (int m = 0; m < K; ++m) acc += errors[m] * bank.line(k, m).window(s.length());
    s.w += s.mu * acc;
  }
}

/// A gradient received from node m, to be transported to this node through
/// c_mk. The gradient may be longer than L_w (lead-in history); extra samples
/// remove the transport's zero-padding edge.
struct CompensatedGradient {
  const Eigen::VectorXd* gradient;
  const ImpulseResponse* compensation;
};

/// Distributed mixed-gradient update: w_k += grad_k + sum_m T_c(grad_m) where
/// T_c is the compensation transport of apply_compensation.
inline void mgdfxlms_update(ControlFilterState& state, const Eigen::VectorXd& own_gradient,
                            std::span<const CompensatedGradient> received) {
  const Eigen::Index L_w = state.length();
  if (own_gradient.size() < L_w) throw ProtocolError("own gradient shorter than the filter");
  state.w += own_gradient.head(L_w);
  for (const auto& r : received) {
    if (r.gradient->size() < L_w) throw ProtocolError("received gradient shorter than the filter");
    state.w += apply_compensation(*r.gradient, *r.compensation, L_w);
  }
}

/// Weight-constrained update: w += mu * x'_kk * e_k + mu*alpha*(w_center - w).
/// mu*alpha must stay below 1 or the penalty overshoots the center.
inline void wcfxlms_update(ControlFilterState& state, const DelayLine& xprime_kk_line,
                           double e_k) {
  const double leak = state.mu * state.alpha;
  if (leak >= 1.0) throw ConfigError("mu * alpha must be < 1 for the weight constraint");
  if (xprime_kk_line.capacity() < state.length())
    throw ConfigError("filtered-reference line shorter than the control filter");
  state.w += (state.mu * e_k) * xprime_kk_line.window(state.length()) +
             leak * (state.w_center - state.w);
}

/// Instantaneous sample of the constrained cost: e^2 + alpha*|w_center - w|^2.
/// Diagnostic only; the updates do not evaluate it.
inline double cost(double e_k, const ControlFilterState& state) {
  return e_k * e_k + state.alpha * (state.w_center - state.w).squaredNorm();
}

}  // namespace dmcanc
