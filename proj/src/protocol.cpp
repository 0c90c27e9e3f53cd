#include "echolock/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "echolock/errors.hpp"

namespace echolock {
namespace {

constexpr double kAreaTol = 1e-9;

bool near_integer(double x) { return std::abs(x - std::round(x)) <= kAreaTol; }

bool odd_integer(double x) {
  return near_integer(x) && std::llround(x) % 2 != 0;
}

// Canonical protocol order; custom labels are unranked.
int canonical_rank(const std::string& label) {
  if (label == "D") return 0;
  if (label == "R") return 1;
  if (label == "B1") return 2;
  if (label == "B2") return 3;
  return -1;
}

EchoClass classify_sum(long long sum) {
  const long long m = ((sum % 4) + 4) % 4;
  if (m == 0) return EchoClass::FullEcho;
  if (m == 2) return EchoClass::InvertedEcho;
  return EchoClass::NullEcho;
}

}  // namespace

PulseEvent PulseEvent::centered(std::string label, Transition transition,
                                double rabi, double area_pi, double t_center,
                                double phase) {
  PulseEvent p;
  p.label = std::move(label);
  p.transition = transition;
  p.rabi = rabi;
  p.area = area_pi;
  p.duration = area_to_duration(area_pi, rabi);
  p.t_on = t_center - 0.5 * p.duration;
  p.phase = phase;
  return p;
}

std::optional<Transition> canonical_transition(const std::string& label) {
  switch (canonical_rank(label)) {
    case 0:
    case 1:
      return Transition::Opt13;
    case 2:
    case 3:
      return Transition::Opt23;
    default:
      return std::nullopt;
  }
}

double area_to_duration(double area_pi, double rabi) {
  if (!(area_pi >= 0.0)) throw ConfigError("pulse area must be >= 0");
  if (area_pi == 0.0) return 0.0;
  if (!(rabi > 0.0)) {
    throw ConfigError("pulse area > 0 is infeasible at zero Rabi frequency");
  }
  // theta = 2 pi rabi t  and  theta = area_pi * pi.
  return area_pi / (2.0 * rabi);
}

double predict_echo_time(double t_d, double t_r, double t_b1, double t_b2) {
  if (!(t_d < t_r && t_r <= t_b1 && t_b1 < t_b2)) {
    throw ConfigError("echo time law needs T_D < T_R <= T_B1 < T_B2");
  }
  return t_b2 + (t_r - t_d) - (t_b1 - t_r);
}

double predict_conventional_echo_time(double t_d, double t_r) {
  if (!(t_d < t_r)) throw ConfigError("two-pulse echo needs T_D < T_R");
  return 2.0 * t_r - t_d;
}

const char* to_string(EchoClass c) {
  switch (c) {
    case EchoClass::FullEcho:
      return "FullEcho";
    case EchoClass::NullEcho:
      return "NullEcho";
    case EchoClass::InvertedEcho:
      return "InvertedEcho";
    case EchoClass::NonRephasing:
      return "NonRephasing";
  }
  return "?";
}

std::optional<EchoClass> classify_areas(double phi_r, double phi_b1,
                                        double phi_b2) {
  if (phi_r < 0.0 || phi_b1 < 0.0 || phi_b2 < 0.0) {
    throw ConfigError("pulse areas must be >= 0");
  }
  if (!odd_integer(phi_r) || !odd_integer(phi_b1)) {
    return EchoClass::NonRephasing;
  }
  const double sum = phi_b1 + phi_b2;
  if (!near_integer(sum)) return std::nullopt;
  return classify_sum(std::llround(sum));
}

EchoClass classify_areas_nearest(double phi_r, double phi_b1, double phi_b2) {
  const double r = std::round(phi_r);
  const double b1 = std::round(phi_b1);
  const double b2 = std::round(phi_b2);
  return *classify_areas(r, b1, b2);
}

const PulseEvent* PulseSequence::find(const std::string& label) const {
  for (const PulseEvent& p : events) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

std::vector<DriveField> PulseSequence::drives_at(double t) const {
  std::vector<DriveField> out;
  for (const PulseEvent& p : events) {
    if (p.duration > 0.0 && p.t_on <= t && t < p.t_off()) {
      out.push_back(p.drive());
    }
  }
  return out;
}

std::optional<double> PulseSequence::conventional_echo_time() const {
  const PulseEvent* d = find("D");
  const PulseEvent* r = find("R");
  if (d == nullptr || r == nullptr) return std::nullopt;
  return predict_conventional_echo_time(d->center(), r->center());
}

bool PulseSequence::locks() const {
  const PulseEvent* b1 = find("B1");
  const auto conventional = conventional_echo_time();
  return conventional && b1 != nullptr && has("B2") &&
         b1->center() < *conventional;
}

std::optional<double> PulseSequence::predicted_echo_time() const {
  if (locks()) {
    return predict_echo_time(find("D")->center(), find("R")->center(),
                             find("B1")->center(), find("B2")->center());
  }
  return conventional_echo_time();
}

PulseSequence build_sequence(std::vector<PulseEvent> events,
                             double window_end) {
  PulseSequence seq;
  std::stable_sort(events.begin(), events.end(),
                   [](const PulseEvent& a, const PulseEvent& b) {
                     return a.t_on < b.t_on;
                   });

  for (std::size_t i = 0; i < events.size(); ++i) {
    const PulseEvent& p = events[i];
    if (p.label.empty()) throw ConfigError("pulse without a label");
    if (!(p.rabi >= 0.0) || !(p.area >= 0.0) || !(p.duration >= 0.0)) {
      throw ConfigError("pulse " + p.label +
                        ": rabi, area and duration must be >= 0");
    }
    if (!(p.t_on >= 0.0)) {
      throw ConfigError("pulse " + p.label + " starts before t = 0");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (events[j].label == p.label) {
        throw ConfigError("duplicate pulse label " + p.label);
      }
    }
    if (auto want = canonical_transition(p.label);
        want && *want != p.transition) {
      throw ConfigError("pulse " + p.label + " must drive " +
                        to_string(*want));
    }
    if (i > 0) {
      const PulseEvent& prev = events[i - 1];
      // Equal leading edges are an overlap too, unless one has zero length.
      if (p.t_on < prev.t_off() - 1e-12 ||
          (p.t_on == prev.t_on && prev.duration > 0.0 && p.duration > 0.0)) {
        std::ostringstream msg;
        msg << "pulses " << prev.label << " [" << prev.t_on << ", "
            << prev.t_off() << "] and " << p.label << " [" << p.t_on << ", "
            << p.t_off() << "] overlap";
        throw ConfigError(msg.str());
      }
    }
  }

  int last_rank = -1;
  std::string last_label;
  for (const PulseEvent& p : events) {
    const int rank = canonical_rank(p.label);
    if (rank < 0) continue;
    if (rank < last_rank) {
      throw ConfigError("pulse " + p.label + " must come after " + last_label);
    }
    last_rank = rank;
    last_label = p.label;
  }

  seq.events = std::move(events);

  const auto conventional = seq.conventional_echo_time();
  if (const PulseEvent* b1 = seq.find("B1"); b1 && conventional &&
                                             b1->center() >= *conventional) {
    std::ostringstream msg;
    msg << "late lock: B1 at " << b1->center()
        << " us acts at or after the two-pulse echo at " << *conventional
        << " us; rephasing completes before B1 switches on";
    seq.warnings.push_back(msg.str());
  }

  double last_off = 0.0;
  for (const PulseEvent& p : seq.events) last_off = std::max(last_off, p.t_off());
  if (window_end <= 0.0) {
    double end = last_off + 10.0;
    if (auto te = seq.predicted_echo_time()) end = std::max(end, *te + 10.0);
    window_end = end;
  }
  if (window_end < last_off) {
    throw ConfigError("window end precedes the last pulse");
  }
  seq.window_end = window_end;
  return seq;
}

}  // namespace echolock
