#pragma once

// Pulse sequences for the phase-locked echo protocol.
//
//   D  (data)      on |1>-|3>, usually pi/2
//   R  (rephasing) on |1>-|3>, odd multiple of pi
//   B1 (locking)   on |2>-|3>, moves |3> amplitude into the spin state
//   B2 (unlocking) on |2>-|3>, returns it; B1 + B2 = 4n pi restores the echo
//
// Pulses are rectangular. A pulse's nominal time T_X is the centre of the
// pulse; `t_on` is the physical leading edge.

#include <optional>
#include <string>
#include <vector>

#include "echolock/bloch.hpp"

namespace echolock {

struct PulseEvent {
  std::string label;
  Transition transition = Transition::Opt13;
  double rabi = 0.0;      // Omega/2pi, MHz
  double area = 0.0;      // multiples of pi
  double duration = 0.0;  // us
  double t_on = 0.0;      // leading edge, us
  double phase = 0.0;     // carrier phase, rad

  double t_off() const { return t_on + duration; }
  double center() const { return t_on + 0.5 * duration; }
  DriveField drive() const { return {transition, rabi, phase}; }

  /// Pulse of the given area (in pi) whose centre sits at `t_center`.
  static PulseEvent centered(std::string label, Transition transition,
                             double rabi, double area_pi, double t_center,
                             double phase = 0.0);
};

/// Transition a canonical label must drive, if the label is canonical.
std::optional<Transition> canonical_transition(const std::string& label);

/// Duration (us) of a pulse of `area_pi` * pi at Omega/2pi = `rabi` MHz.
double area_to_duration(double area_pi, double rabi);

/// Echo time of the locked sequence:
/// T_E = T_B2 + (T_R - T_D) - (T_B1 - T_R). Requires T_D < T_R <= T_B1 < T_B2.
double predict_echo_time(double t_d, double t_r, double t_b1, double t_b2);

/// Two-pulse echo time 2 T_R - T_D. Requires T_D < T_R.
double predict_conventional_echo_time(double t_d, double t_r);

enum class EchoClass { FullEcho, NullEcho, InvertedEcho, NonRephasing };

const char* to_string(EchoClass c);

/// Pulse-area selection rule. R and B1 must be odd multiples of pi; the
/// outcome then follows (B1 + B2) mod 4pi. Returns nullopt when B1 + B2 is
/// not an integer multiple of pi (no rule applies). Areas are in units of pi.
std::optional<EchoClass> classify_areas(double phi_r, double phi_b1,
                                        double phi_b2);

/// Advisory variant for reporting: rounds every area to the nearest integer
/// multiple of pi before classifying.
EchoClass classify_areas_nearest(double phi_r, double phi_b1, double phi_b2);

struct PulseSequence {
  std::vector<PulseEvent> events;  // sorted by t_on, non-overlapping
  double window_end = 0.0;         // us
  std::vector<std::string> warnings;

  const PulseEvent* find(const std::string& label) const;
  bool has(const std::string& label) const { return find(label) != nullptr; }

  /// Drives on at time t (pulses are half-open intervals [t_on, t_off)).
  /// Callers split time at pulse edges and query segment midpoints.
  std::vector<DriveField> drives_at(double t) const;

  /// True when B1 and B2 are present and B1 acts before the two-pulse echo.
  bool locks() const;
  /// Predicted time of the echo the sequence is designed to emit.
  std::optional<double> predicted_echo_time() const;
  /// Two-pulse echo time if D and R are present.
  std::optional<double> conventional_echo_time() const;
};

/// Sorts and validates events. Throws ConfigError on overlap, a B2 before B1,
/// out-of-order canonical labels, or a canonical label on the wrong
/// transition. Records a warning when B1 starts at or after the two-pulse echo
/// time. A non-positive `window_end` picks a default past the last event of
/// interest.
PulseSequence build_sequence(std::vector<PulseEvent> events,
                             double window_end = 0.0);

}  // namespace echolock
