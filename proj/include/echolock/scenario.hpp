#pragma once

// Scenario files: INI-style key-value text.
//
//   [system]       gamma13 gamma23 gamma12 Gamma31 Gamma32 Gamma12 (kHz),
//                  detuning_sign (-1 | 1)
//   [grid]         fwhm spacing (kHz), count
//   [pulse.LABEL]  transition (opt13 | opt23), rabi (MHz),
//                  area (e.g. 3pi, pi/2) | duration (us),
//                  t (pulse centre, us) | t_on (leading edge, us), phase (rad)
//   [integrator]   dt_pulse dt_free (us), method (rk4)
//   [output]       sample_period t_end echo_half_width (us), echo_threshold,
//                  coherences (comma-separated kHz list)
//
// '#' and ';' start comments. Unknown sections or keys are errors.
// See docs/scenario_format.md for the full schema.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "echolock/ensemble.hpp"
#include "echolock/integrator.hpp"
#include "echolock/protocol.hpp"

namespace echolock {

/// Ordered sections of ordered key/value pairs, as written.
struct Document {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  std::vector<Section> sections;

  const Section* find(std::string_view name) const;
  /// Sets `key` in `section`, creating either as needed.
  void set(const std::string& section, const std::string& key,
           const std::string& value);
  void erase(const std::string& section, const std::string& key);
  const std::string* get(std::string_view section, std::string_view key) const;
};

/// Syntax-level parse. Throws ConfigError with the line number on malformed
/// lines, duplicate sections or duplicate keys.
Document parse_document(std::string_view text);

struct GridSpec {
  double fwhm = 680.0;  // kHz
  double spacing = 10.0;
  int count = 161;
};

struct OutputSpec {
  double sample_period = 0.01;  // us
  double t_end = 0.0;           // us, 0 = automatic
  double echo_half_width = 2.0;  // us
  // Echoes weaker than this fraction of the free-induction peak are reported
  // as not detected.
  double echo_threshold = 0.02;
  std::vector<double> coherences;  // kHz, must lie on the grid
};

struct ScenarioPulse {
  PulseEvent event;
  bool by_area = true;    // area given (else duration)
  bool by_center = true;  // t given (else t_on)
  double time = 0.0;      // the t or t_on value as written
};

struct Scenario {
  SystemParams system;
  GridSpec grid;
  std::vector<ScenarioPulse> pulses;
  IntegratorConfig integrator;
  OutputSpec output;

  PulseSequence sequence() const;
  DetuningGrid detuning_grid() const;
  const ScenarioPulse* pulse(const std::string& label) const;
};

/// Parses a pulse area written in units of pi: "pi", "3pi", "pi/2",
/// "0.5 pi", "3*pi", "0". Returns the multiple of pi.
double parse_area(std::string_view text);

/// Validates a document into a Scenario with defaults filled in. Errors name
/// the offending section and key.
Scenario scenario_from_document(const Document& doc);
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Canonical, fully resolved scenario text. Every number is written in
/// shortest round-trip form, so parsing it back yields a Scenario whose runs
/// are bitwise identical.
std::string write_scenario(const Scenario& scenario,
                           std::string_view header_comment = {});

}  // namespace echolock
