#include <doctest.h>

#include <random>

#include "echolock/errors.hpp"
#include "echolock/protocol.hpp"

using namespace echolock;

namespace {

std::vector<PulseEvent> baseline_events(double t_b1 = 10.1, double b2_area = 3.0) {
  return {
      PulseEvent::centered("D", Transition::Opt13, 5.0, 0.5, 5.0),
      PulseEvent::centered("R", Transition::Opt13, 5.0, 1.0, 10.0),
      PulseEvent::centered("B1", Transition::Opt23, 5.0, 1.0, t_b1),
      PulseEvent::centered("B2", Transition::Opt23, 5.0, b2_area, 55.0),
  };
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("area_to_duration") {
  CHECK(area_to_duration(2.0, 5.0) == doctest::Approx(0.2));
  CHECK(area_to_duration(7.0, 5.0) == doctest::Approx(0.7));
  CHECK(area_to_duration(0.0, 5.0) == 0.0);
  CHECK(area_to_duration(0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(area_to_duration(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(area_to_duration(-1.0, 5.0), ConfigError);
}

TEST_CASE("centered pulses") {
  const PulseEvent b2 = PulseEvent::centered("B2", Transition::Opt23, 5.0, 7.0, 50.35);
  CHECK(b2.t_on == doctest::Approx(50.0));
  CHECK(b2.t_off() == doctest::Approx(50.7));
  CHECK(b2.center() == doctest::Approx(50.35));
  CHECK(b2.drive().transition == Transition::Opt23);
}

TEST_CASE("predict_echo_time") {
  CHECK(predict_echo_time(5, 15, 22, 55) == doctest::Approx(58.0));
  CHECK(predict_echo_time(5, 10, 10.1, 55) == doctest::Approx(59.9));
  for (double tb2 : {20.0, 55.0, 123.4}) {
    CHECK(predict_echo_time(5, 10, 10, tb2) == doctest::Approx(tb2 + 5.0));
  }
  CHECK_THROWS_AS(predict_echo_time(15, 5, 22, 55), ConfigError);
  CHECK_THROWS_AS(predict_echo_time(5, 15, 14, 55), ConfigError);
  CHECK_THROWS_AS(predict_echo_time(5, 15, 22, 22), ConfigError);
}

TEST_CASE("predict_conventional_echo_time") {
  CHECK(predict_conventional_echo_time(5, 15) == 25.0);
  CHECK(predict_conventional_echo_time(5, 10) == 15.0);
  CHECK(predict_conventional_echo_time(0, 7.5) == 15.0);
  CHECK_THROWS_AS(predict_conventional_echo_time(10, 10), ConfigError);
}

TEST_CASE("locked echo with B1 at R reduces to a shifted two-pulse echo") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.1, 20.0);
  for (int i = 0; i < 200; ++i) {
    const double td = u(rng);
    const double tr = td + u(rng);
    const double tb2 = tr + u(rng);
    CHECK(predict_echo_time(td, tr, tr, tb2) - tb2 ==
          doctest::Approx(predict_conventional_echo_time(td, tr) - tr));
  }
}

TEST_CASE("classify_areas examples") {
  CHECK(classify_areas(1, 1, 3) == EchoClass::FullEcho);
  CHECK(classify_areas(1, 1, 1) == EchoClass::InvertedEcho);
  CHECK(classify_areas(1, 1, 2) == EchoClass::NullEcho);
  CHECK(classify_areas(1, 1, 7) == EchoClass::FullEcho);
  CHECK(classify_areas(2, 1, 3) == EchoClass::NonRephasing);
  CHECK(classify_areas(1, 2, 2) == EchoClass::NonRephasing);
  CHECK(classify_areas(0.5, 1, 3) == EchoClass::NonRephasing);
  CHECK(classify_areas(3, 3, 5) == EchoClass::FullEcho);
  CHECK_FALSE(classify_areas(1, 1, 2.5).has_value());
  CHECK(classify_areas_nearest(1, 1, 2.6) == EchoClass::FullEcho);
  CHECK(classify_areas_nearest(1.02, 0.97, 1.1) == EchoClass::InvertedEcho);
  CHECK_THROWS_AS(classify_areas(-1, 1, 3), ConfigError);
  CHECK(std::string(to_string(EchoClass::NullEcho)) == "NullEcho");
}

TEST_CASE("classify_areas has period 4pi in B2 and B1/B2 swap symmetry") {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> n(0, 12);
  for (int i = 0; i < 500; ++i) {
    const double r = n(rng), b1 = n(rng), b2 = n(rng);
    CHECK(classify_areas(r, b1, b2) == classify_areas(r, b1, b2 + 4.0));
    if (static_cast<int>(b1) % 2 == 1 && static_cast<int>(b2) % 2 == 1) {
      CHECK(classify_areas(r, b1, b2) == classify_areas(r, b2, b1));
    }
  }
  CHECK(classify_areas(1, 1, 3) == classify_areas(1, 3, 1));
}

TEST_CASE("build_sequence on the baseline") {
  const PulseSequence seq = build_sequence(baseline_events());
  CHECK(seq.warnings.empty());
  REQUIRE(seq.events.size() == 4);
  CHECK(seq.events[0].label == "D");
  CHECK(seq.events[3].label == "B2");
  CHECK(seq.locks());
  CHECK(*seq.predicted_echo_time() == doctest::Approx(59.9));
  CHECK(*seq.conventional_echo_time() == doctest::Approx(15.0));
  CHECK(seq.window_end == doctest::Approx(69.9));
}

TEST_CASE("build_sequence sorts its input") {
  auto events = baseline_events();
  std::swap(events[0], events[3]);
  std::swap(events[1], events[2]);
  const PulseSequence seq = build_sequence(events);
  CHECK(seq.events[0].label == "D");
  CHECK(seq.events[1].label == "R");
  CHECK(seq.events[2].label == "B1");
}

TEST_CASE("late lock warns") {
  const std::vector<PulseEvent> events = {
      PulseEvent::centered("D", Transition::Opt13, 5.0, 0.5, 5.0),
      PulseEvent::centered("R", Transition::Opt13, 5.0, 1.0, 15.0),
      PulseEvent::centered("B1", Transition::Opt23, 5.0, 1.0, 30.0),
      PulseEvent::centered("B2", Transition::Opt23, 5.0, 3.0, 55.0),
  };
  const PulseSequence seq = build_sequence(events);
  REQUIRE(seq.warnings.size() == 1);
  CHECK(seq.warnings[0].find("late lock") != std::string::npos);
  CHECK_FALSE(seq.locks());
  CHECK(*seq.predicted_echo_time() == doctest::Approx(25.0));
}

TEST_CASE("build_sequence rejections") {
  auto overlap = baseline_events(10.05);
  CHECK_THROWS_AS(build_sequence(overlap), ConfigError);

  // B2 placed before B1 violates the canonical order.
  std::vector<PulseEvent> order = baseline_events();
  order[3] = PulseEvent::centered("B2", Transition::Opt23, 5.0, 3.0, 8.0);
  CHECK_THROWS_AS(build_sequence(order), ConfigError);

  std::vector<PulseEvent> wrong = baseline_events();
  wrong[2].transition = Transition::Opt13;
  CHECK_THROWS_AS(build_sequence(wrong), ConfigError);

  std::vector<PulseEvent> dup = baseline_events();
  dup[3].label = "B1";
  CHECK_THROWS_AS(build_sequence(dup), ConfigError);

  CHECK_THROWS_AS(build_sequence(baseline_events(), 30.0), ConfigError);

  std::vector<PulseEvent> early = {PulseEvent::centered("X", Transition::Opt13, 5.0, 1.0, 0.0)};
  CHECK_THROWS_AS(build_sequence(early), ConfigError);
}

TEST_CASE("custom labels and drives_at") {
  const std::vector<PulseEvent> events = {
      PulseEvent::centered("D", Transition::Opt13, 5.0, 0.5, 5.0),
      PulseEvent::centered("probe", Transition::Opt23, 2.0, 1.0, 7.0),
  };
  const PulseSequence seq = build_sequence(events);
  CHECK(seq.drives_at(4.0).empty());
  REQUIRE(seq.drives_at(5.0).size() == 1);
  CHECK(seq.drives_at(5.0)[0].transition == Transition::Opt13);
  CHECK(seq.drives_at(seq.events[0].t_off()).empty());
  REQUIRE(seq.drives_at(7.0).size() == 1);
  CHECK(seq.drives_at(7.0)[0].rabi == 2.0);
  CHECK_FALSE(seq.predicted_echo_time().has_value());
  CHECK(seq.window_end == doctest::Approx(seq.events[1].t_off() + 10.0));
}

}  // TEST_SUITE
