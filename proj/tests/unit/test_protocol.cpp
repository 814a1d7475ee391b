#include <doctest.h>

#include <vector>

#include "dmcanc/control.hpp"
#include "dmcanc/errors.hpp"
#include "dmcanc/protocol.hpp"
#include "dmcanc/rng.hpp"

using namespace dmcanc;

namespace {

CompensationSet unit_compensation(int K) {
  CompensationSet set(K, 1);
  for (int m = 0; m < K; ++m)
    for (int k = 0; k < K; ++k)
      if (m != k) set.set_filter(m, k, ImpulseResponse::unit());
  return set;
}

}  // namespace

TEST_SUITE("comms-protocol") {

TEST_CASE("rnl reference points") {
  CHECK(rnl(1.0) == 0.0);
  CHECK(rnl(0.1) == doctest::Approx(-20.0));
  CHECK(rnl(0.0) == doctest::Approx(10.0 * std::log10(kRnlFloor)));
  CHECK(std::isfinite(rnl(0.0)));
}

TEST_CASE("window length follows round(T*fs)") {
  TriggerMonitor monitor(0.3, 16000.0);
  CHECK(monitor.window_len() == 4800);
  CHECK_THROWS_AS(TriggerMonitor(0.0, 16000.0), ConfigError);
}

TEST_CASE("arnl is the arithmetic mean of the window's RNL values") {
  TriggerMonitor monitor(1.0, 8.0);  // window of 8 samples
  CHECK(!monitor.arnl().has_value());
  for (int i = 0; i < 4; ++i) CHECK(!monitor.push(1.0));
  for (int i = 0; i < 3; ++i) CHECK(!monitor.push(0.1));
  CHECK(!monitor.arnl().has_value());  // still one sample short
  CHECK(monitor.push(0.1));
  REQUIRE(monitor.arnl().has_value());
  CHECK(*monitor.arnl() == doctest::Approx(-10.0));  // mean of 0 dB and -20 dB halves

  for (int i = 0; i < 8; ++i) monitor.push(1.0);
  CHECK(*monitor.arnl() == doctest::Approx(0.0));
}

TEST_CASE("request rule: worse-than-previous with a strict inequality") {
  TriggerMonitor monitor(1.0, 4.0);
  // windows at -5, -8, -7 dB: no baseline, improving, worsening
  CHECK(!monitor.should_request(-5.0));  // first window: no previous value
  CHECK(!monitor.should_request(-8.0));
  CHECK(monitor.should_request(-7.0));

  TriggerMonitor improving(1.0, 4.0);
  CHECK(!improving.should_request(-1.0));
  CHECK(!improving.should_request(-2.0));
  CHECK(!improving.should_request(-3.0));
  CHECK(!improving.should_request(-4.0));

  TriggerMonitor flat(1.0, 4.0);
  CHECK(!flat.should_request(-6.0));
  CHECK(!flat.should_request(-6.0));  // ties do not trigger
  CHECK(!flat.should_request(-6.0));

  TriggerMonitor hyst(1.0, 4.0, 1.5);
  CHECK(!hyst.should_request(-6.0));
  CHECK(!hyst.should_request(-5.0));  // worse, but inside the hysteresis band
  CHECK(hyst.should_request(-3.0));
}

TEST_CASE("no trigger can fire in the first window") {
  TriggerMonitor monitor(1.0, 4.0);
  for (int i = 0; i < 3; ++i) monitor.push(0.5);
  CHECK(monitor.push(0.5));
  CHECK(!monitor.should_request(*monitor.arnl()));
}

TEST_CASE("weight difference cases") {
  auto state = make_control_state(3, 0.1, 5.0);
  CHECK(weight_difference(state).isZero(0.0));  // w = w_center = 0

  state.w << 0.5, -0.25, 1.0;
  CHECK(weight_difference(state) == state.w);  // center still zero

  // one WCFxLMS step from w = w_center gives phi = mu * x' * e exactly
  auto s2 = make_control_state(2, 0.1, 5.0);
  s2.w << 0.3, 0.4;
  s2.w_center = s2.w;
  DelayLine xp(2);
  xp.push(2.0);
  xp.push(-1.0);
  const Eigen::VectorXd before = s2.w;
  wcfxlms_update(s2, xp, 0.5);
  const Eigen::VectorXd phi = weight_difference(s2);
  const Eigen::VectorXd expect = (0.1 * 0.5) * xp.window(2);
  CHECK((phi - expect).cwiseAbs().maxCoeff() <= 1e-16);
}

TEST_CASE("mwd_combine hand cases") {
  auto state = make_control_state(1, 0.1, 1.0);

  // K=1: center snaps to w(n+1)
  state.w[0] = 0.7;
  Eigen::VectorXd phi = weight_difference(state);
  CHECK(mwd_combine(state, phi, {})[0] == doctest::Approx(0.7));

  // all remote phi zero
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  const ImpulseResponse c = ImpulseResponse::unit();
  std::vector<CompensatedGradient> recv{{&zero, &c}, {&zero, &c}};
  CHECK(mwd_combine(state, phi, recv)[0] == doctest::Approx(0.7));

  // hand sum: w_center=0, own phi 0.2, remote 0.3 and -0.1 through unit filters
  auto s3 = make_control_state(1, 0.1, 1.0);
  s3.w[0] = 0.2;  // phi_own = w - w_center = 0.2
  Eigen::VectorXd p2(1), p3(1);
  p2 << 0.3;
  p3 << -0.1;
  std::vector<CompensatedGradient> recv3{{&p2, &c}, {&p3, &c}};
  CHECK(mwd_combine(s3, weight_difference(s3), recv3)[0] == doctest::Approx(0.4));

  Eigen::VectorXd wrong(2);
  wrong << 1.0, 2.0;
  CHECK_THROWS_AS(mwd_combine(s3, wrong, {}), ProtocolError);
}

TEST_CASE("async event updates only the requester") {
  std::vector<ControlFilterState> nodes{make_control_state(2, 0.1, 1.0),
                                        make_control_state(2, 0.1, 1.0)};
  nodes[0].w << 0.4, -0.2;  // phi_0 = w_0
  // node 1 idle: phi_1 = 0
  for (const auto reset : {TransmitterReset::Reset, TransmitterReset::Keep}) {
    auto trial = nodes;
    const CommEvent ev = execute_async_event(trial, 0, unit_compensation(2), reset);
    CHECK(ev.requester == 0);
    CHECK(ev.payloads.size() == 2);
    CHECK(trial[0].w_center == trial[0].w);                  // snapped
    CHECK(weight_difference(trial[0]).isZero(0.0));          // phi cleared
    CHECK(trial[1].w.isZero(0.0));                           // idle node untouched
    CHECK(trial[1].w_center.isZero(0.0));
  }
}

TEST_CASE("transmitter reset folds history so it is not re-sent") {
  // event at node 0, then immediately at node 1: with the reset policy the
  // second event must see a zero difference from every earlier transmitter
  auto fresh = [] {
    std::vector<ControlFilterState> nodes;
    for (int k = 0; k < 3; ++k) nodes.push_back(make_control_state(1, 0.1, 1.0));
    nodes[0].w[0] = 0.5;  // accumulated local history
    nodes[1].w[0] = 0.25;
    nodes[2].w[0] = 0.125;
    return nodes;
  };
  const auto comp = unit_compensation(3);

  auto reset = fresh();
  execute_async_event(reset, 0, comp, TransmitterReset::Reset);
  // node 0 combined: 0.5 + 0.25 + 0.125; transmitters folded their centers
  CHECK(reset[0].w[0] == doctest::Approx(0.875));
  CHECK(reset[1].w_center[0] == doctest::Approx(0.25));
  CHECK(reset[2].w_center[0] == doctest::Approx(0.125));

  const CommEvent second = execute_async_event(reset, 1, comp, TransmitterReset::Reset);
  CHECK(second.payloads[0].isZero(0.0));          // requester of event 1
  CHECK(second.payloads[2].isZero(0.0));          // folded transmitter
  CHECK(reset[1].w[0] == doctest::Approx(0.25));  // nothing new arrived

  // keep policy: node 2's difference is re-sent to the second requester
  auto keep = fresh();
  execute_async_event(keep, 0, comp, TransmitterReset::Keep);
  const CommEvent second_keep = execute_async_event(keep, 1, comp, TransmitterReset::Keep);
  CHECK(second_keep.payloads[2][0] == doctest::Approx(0.125));
  CHECK(keep[1].w[0] == doctest::Approx(0.25 + 0.125));
}

TEST_CASE("sync event preserves a symmetric two-node state") {
  std::vector<ControlFilterState> nodes{make_control_state(2, 0.1, 1.0),
                                        make_control_state(2, 0.1, 1.0)};
  nodes[0].w << 0.3, 0.1;
  nodes[1].w = nodes[0].w;
  nodes[0].w_center << 0.05, 0.0;
  nodes[1].w_center = nodes[0].w_center;

  execute_sync_event(nodes, unit_compensation(2), 0);
  CHECK(nodes[0].w == nodes[1].w);
  CHECK(nodes[0].w_center == nodes[1].w_center);
  CHECK(nodes[0].w == nodes[0].w_center);
}

TEST_CASE("sync event hand trace with unit compensation") {
  std::vector<ControlFilterState> nodes{make_control_state(1, 0.1, 1.0),
                                        make_control_state(1, 0.1, 1.0)};
  nodes[0].w[0] = 0.5;
  nodes[0].w_center[0] = 0.2;  // phi_0 = 0.3
  nodes[1].w[0] = -0.1;
  nodes[1].w_center[0] = 0.1;  // phi_1 = -0.2

  execute_sync_event(nodes, unit_compensation(2), 0);
  CHECK(nodes[0].w[0] == doctest::Approx(0.2 + 0.3 - 0.2));  // 0.3
  CHECK(nodes[1].w[0] == doctest::Approx(0.1 - 0.2 + 0.3));  // 0.2
  CHECK(nodes[0].w_center[0] == nodes[0].w[0]);
  CHECK(nodes[1].w_center[0] == nodes[1].w[0]);
}

TEST_CASE("event combination norms obey the triangle/Young bound") {
  Rng rng(88);
  const Eigen::Index L_w = 16, L_c = 5;
  std::vector<ControlFilterState> nodes;
  CompensationSet comp(3, L_c);
  for (int k = 0; k < 3; ++k) {
    auto s = make_control_state(L_w, 0.1, 2.0);
    for (Eigen::Index i = 0; i < L_w; ++i) {
      s.w[i] = rng.normal();
      s.w_center[i] = rng.normal();
    }
    nodes.push_back(std::move(s));
  }
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 3; ++k)
      if (m != k) {
        Eigen::VectorXd c(L_c);
        for (Eigen::Index i = 0; i < L_c; ++i) c[i] = 0.3 * rng.normal();
        comp.set_filter(m, k, ImpulseResponse(c));
      }

  const int requester = 1;
  double bound = nodes[requester].w_center.norm() +
                 weight_difference(nodes[requester]).norm();
  for (int m = 0; m < 3; ++m)
    if (m != requester)
      bound += weight_difference(nodes[m]).lpNorm<1>() *
               comp.filter(m, requester).taps().lpNorm<1>();

  execute_async_event(nodes, requester, comp, TransmitterReset::Reset);
  CHECK(nodes[requester].w_center.norm() <= bound + 1e-12);
}

TEST_CASE("after any MWD application the requester's phi is exactly zero") {
  Rng rng(13);
  std::vector<ControlFilterState> nodes;
  for (int k = 0; k < 2; ++k) {
    auto s = make_control_state(4, 0.1, 1.0);
    for (Eigen::Index i = 0; i < 4; ++i) s.w[i] = rng.normal();
    nodes.push_back(std::move(s));
  }
  auto comp = unit_compensation(2);
  execute_async_event(nodes, 1, comp, TransmitterReset::Keep);
  CHECK(weight_difference(nodes[1]).isZero(0.0));
  execute_sync_event(nodes, comp, 0);
  CHECK(weight_difference(nodes[0]).isZero(0.0));
  CHECK(weight_difference(nodes[1]).isZero(0.0));
}

}  // TEST_SUITE
