#include <doctest.h>

#include <numeric>

#include "echolock/analysis.hpp"
#include "echolock/ensemble.hpp"
#include "echolock/errors.hpp"
#include "oracles.hpp"

using namespace echolock;

namespace {

PulseSequence two_pulse(double t_d = 5.0, double t_r = 10.0, double window = 0.0,
                        double rabi = 5.0) {
  return build_sequence({PulseEvent::centered("D", Transition::Opt13, rabi, 0.5, t_d),
                         PulseEvent::centered("R", Transition::Opt13, rabi, 1.0, t_r)},
                        window);
}

std::size_t nearest_sample(const EnsembleTrajectory& tr, double t) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (std::abs(tr.times[i] - t) < std::abs(tr.times[best] - t)) best = i;
  }
  return best;
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("build_grid examples") {
  const DetuningGrid g = build_grid(680, 10, 161);
  REQUIRE(g.size() == 161);
  CHECK(g.offsets.front() == -800.0);
  CHECK(g.offsets.back() == 800.0);
  CHECK(g.offsets[80] == 0.0);
  CHECK(g.weights[g.index_of(340)] / g.weights[80] == doctest::Approx(0.5).epsilon(1e-12));
  const double total = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
  CHECK(std::abs(total - 1.0) <= 1e-12);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.offsets[i] == -g.offsets[g.size() - 1 - i]);
    CHECK(g.weights[i] == g.weights[g.size() - 1 - i]);
  }
  CHECK(g.index_of(40.0) == 84);
  CHECK(g.index_of(45.0) == -1);

  const oracle::Grid o = oracle::gaussian_grid(680, 10, 161);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.weights[i] == doctest::Approx(o.weights[i]).epsilon(1e-12));
  }

  CHECK_THROWS_AS(build_grid(680, 10, 160), ConfigError);
  CHECK_THROWS_AS(build_grid(0, 10, 161), ConfigError);
  CHECK_THROWS_AS(build_grid(680, -1, 161), ConfigError);
  CHECK(build_grid(680, 10, 1).weights[0] == 1.0);
}

TEST_CASE("macroscopic_signal") {
  const DetuningGrid g = build_grid(680, 10, 21);
  const cplx c(0.1, -0.2);
  std::vector<Matrix3c> states(g.size(), Matrix3c::Zero());
  for (auto& s : states) s(2, 0) = c;
  CHECK(std::abs(macroscopic_signal(states, g) - c) < 1e-15);

  for (std::size_t i = 0; i < g.size(); ++i) {
    states[i](2, 0) = c * std::polar(1.0, 0.01 * g.offsets[i]);
  }
  const cplx s = macroscopic_signal(states, g) / c;
  CHECK(std::abs(s.imag()) < 1e-15);
  CHECK(s.real() > 0.0);

  for (std::size_t i = 0; i < g.size(); ++i) states[i](2, 0) = c * (g.offsets[i] / 100.0);
  CHECK(std::abs(macroscopic_signal(states, g)) < 1e-15);

  states.pop_back();
  CHECK_THROWS_AS(macroscopic_signal(states, g), ConfigError);
}

TEST_CASE("single resonant group keeps its coherence without decay") {
  const PulseSequence seq = build_sequence(
      {PulseEvent::centered("D", Transition::Opt13, 5.0, 0.5, 1.0)}, 4.0);
  const auto tr = run_ensemble(seq, build_grid(680, 10, 1), SystemParams{}, IntegratorConfig{});
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.times[i] >= seq.events[0].t_off()) {
      CHECK(std::abs(tr.signal[i]) == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == doctest::Approx(4.0));
  CHECK(tr.times.size() == 401);
}

TEST_CASE("free-induction decay follows the Gaussian envelope") {
  const PulseSequence seq = build_sequence(
      {PulseEvent::centered("D", Transition::Opt13, 5.0, 0.5, 5.0)}, 7.0);
  const DetuningGrid g = build_grid(680, 10, 161);
  const auto tr = run_ensemble(seq, g, SystemParams{}, IntegratorConfig{});
  const oracle::Grid og = oracle::gaussian_grid(680, 10, 161);

  double peak = 0.0;
  for (cplx s : tr.signal) peak = std::max(peak, std::abs(s));
  CHECK(peak == doctest::Approx(0.5).epsilon(0.01));
  // The continuous envelope falls to 1% at 2 pi sigma t = sqrt(2 ln 100),
  // 1.67 us after D, and the discrete ideal-pulse sum slightly later; at
  // 1 us both are still near 19%.
  const double t_one_percent =
      std::sqrt(2.0 * std::log(100.0)) / (2.0 * oracle::kPi * 0.68 / (2.0 * std::sqrt(2.0 * std::log(2.0))));
  CHECK(t_one_percent == doctest::Approx(1.67).epsilon(0.01));
  double sim_cross = 0.0, oracle_cross = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.times[i] <= 5.0) continue;
    if (std::abs(tr.signal[i]) >= 0.01 * peak) sim_cross = tr.times[i];
    if (std::abs(oracle::ideal_fid_signal(og, 5.0, tr.times[i])) >= 0.005) oracle_cross = tr.times[i];
  }
  CHECK(std::abs(sim_cross - oracle_cross) <= 0.05);
  CHECK(sim_cross - 5.0 < 2.0);

  const double t_d = seq.events[0].center();
  for (double dt : {0.1, 0.2, 0.3, 0.4}) {
    const std::size_t i = nearest_sample(tr, t_d + 0.05 + dt);
    const double t = tr.times[i] - t_d;
    const double discrete = std::abs(oracle::ideal_fid_signal(og, t_d, tr.times[i]));
    CHECK(std::abs(tr.signal[i]) == doctest::Approx(discrete).epsilon(0.02));
    CHECK(discrete == doctest::Approx(oracle::gaussian_fid_envelope(680, t)).epsilon(0.01));
  }
}

TEST_CASE("decay-free two-pulse echo re-peaks at 2 T_R - T_D") {
  const DetuningGrid g = build_grid(680, 10, 161);

  // Near-ideal 50 MHz pulses: the echo recovers the full 0.5.
  IntegratorConfig fast;
  fast.dt_pulse = 0.0001;
  const auto ideal = run_ensemble(two_pulse(5.0, 10.0, 17.0, 50.0), g, SystemParams{}, fast);
  const auto p50 = detect_echo(ideal, 13.0, 17.0);
  REQUIRE(p50.has_value());
  CHECK(std::abs(p50->t_peak - 15.0) <= 0.01);
  CHECK(std::abs(p50->magnitude - 0.5) <= 1e-3);

  // At 5 MHz the +-800 kHz wings see detuned pulses, costing about 0.3%.
  const PulseSequence seq = two_pulse(5.0, 10.0, 17.0);
  EnsembleOptions opt;
  opt.snapshot_times = {12.5, 15.0};
  const auto tr = run_ensemble(seq, g, SystemParams{}, IntegratorConfig{}, opt);
  const auto peak = detect_echo(tr, 13.0, 17.0);
  REQUIRE(peak.has_value());
  CHECK(std::abs(peak->t_peak - 15.0) <= 0.01);
  CHECK(peak->magnitude < 0.5);
  CHECK(peak->magnitude > 0.497);

  // Echo timing: argmax over t > T_R lies within one sample of 15.
  std::size_t arg = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    if (tr.times[i] > 10.1 && std::abs(tr.signal[i]) > std::abs(tr.signal[arg])) arg = i;
  }
  CHECK(std::abs(tr.times[arg] - 15.0) <= 0.01 + 1e-12);

  CHECK(phase_spread(tr.snapshot_at(15.0).states, g.weights) <= 1e-3);
  CHECK(phase_spread(tr.snapshot_at(12.5).states, g.weights) >= 0.5);

  for (cplx s : tr.signal) CHECK(std::abs(s) <= 0.5 + 1e-9);
  CHECK(tr.integrity.max_trace_error <= 1e-8);
  CHECK(tr.integrity.min_eigenvalue >= -1e-7);
}

TEST_CASE("results do not depend on the thread count") {
  const PulseSequence seq = two_pulse(1.0, 3.0, 6.0);
  const DetuningGrid g = build_grid(680, 10, 41);
  SystemParams p;
  p.gamma13 = 10;
  p.Gamma31 = 5;
  EnsembleOptions one;
  one.threads = 1;
  EnsembleOptions four = one;
  four.threads = 4;
  const auto a = run_ensemble(seq, g, p, IntegratorConfig{}, one);
  const auto b = run_ensemble(seq, g, p, IntegratorConfig{}, four);
  const auto c = run_ensemble(seq, g, p, IntegratorConfig{}, four);
  REQUIRE(a.signal.size() == b.signal.size());
  CHECK(a.times == b.times);
  CHECK(a.signal == b.signal);
  CHECK(b.signal == c.signal);
  CHECK(a.populations == b.populations);
}

TEST_CASE("tracked groups and snapshots") {
  const PulseSequence seq = two_pulse(1.0, 3.0, 6.0);
  const DetuningGrid g = build_grid(680, 10, 21);
  EnsembleOptions opt;
  opt.tracked_groups = {10, 14};
  opt.snapshot_times = {2.0, 3.333};
  const auto tr = run_ensemble(seq, g, SystemParams{}, IntegratorConfig{}, opt);
  REQUIRE(tr.tracked.size() == 2);
  CHECK(tr.tracked[0].delta == 0.0);
  CHECK(tr.tracked[1].delta == 40.0);
  CHECK(tr.tracked[1].trajectory.times == tr.times);

  const Snapshot& s = tr.snapshot_at(3.333);
  REQUIRE(s.states.size() == g.size());
  CHECK(std::abs(macroscopic_signal(s.states, g)) > 0.0);
  CHECK(s.states[14] == tr.snapshot_at(3.333).states[14]);
  CHECK_THROWS_AS(tr.snapshot_at(2.5), std::out_of_range);

  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const auto& p = tr.populations[i];
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-12));
  }

  opt.tracked_groups = {21};
  CHECK_THROWS_AS(run_ensemble(seq, g, SystemParams{}, IntegratorConfig{}, opt), ConfigError);
}

TEST_CASE("frame sign does not change the echo magnitude") {
  const PulseSequence seq = two_pulse(1.0, 3.0, 6.0);
  const DetuningGrid g = build_grid(680, 10, 41);
  SystemParams minus;
  SystemParams plus;
  plus.detuning_sign = 1;
  const auto a = run_ensemble(seq, g, minus, IntegratorConfig{});
  const auto b = run_ensemble(seq, g, plus, IntegratorConfig{});
  REQUIRE(a.signal.size() == b.signal.size());
  for (std::size_t i = 0; i < a.signal.size(); ++i) {
    CHECK(std::abs(a.signal[i]) == doctest::Approx(std::abs(b.signal[i])).epsilon(1e-9));
  }
}

TEST_CASE("integrator failures are tagged with the detuning") {
  SystemParams p;
  p.gamma13 = 1e8;
  try {
    run_ensemble(two_pulse(1.0, 3.0, 6.0), build_grid(680, 10, 3), p, IntegratorConfig{});
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("delta = -10 kHz") != std::string::npos);
  }
}

}  // TEST_SUITE
