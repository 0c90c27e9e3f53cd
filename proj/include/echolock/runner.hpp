#pragma once

// Single runs and parameter scans over scenarios, plus their file outputs.

#include <optional>
#include <string>
#include <vector>

#include "echolock/analysis.hpp"
#include "echolock/scenario.hpp"

namespace echolock {

const char* version();

struct EchoRow {
  std::string kind;  // "conventional", "locked" or "post_b2"
  double t_predicted = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  std::optional<EchoPeak> peak;
  std::optional<double> efficiency;  // percent
  bool detected = false;             // above echo_threshold * fid_peak
};

struct RunResult {
  Scenario scenario;
  PulseSequence sequence;
  DetuningGrid grid;
  EnsembleTrajectory trajectory;
  std::vector<EchoRow> echoes;
  std::optional<EchoPeak> reference;  // two-pulse echo used for efficiency
  double fid_peak = 0.0;              // max |S| between D and the next pulse
};

/// Same D and R, same decays but gamma12 = 0, no other pulses. nullopt when
/// the scenario lacks D or R.
std::optional<Scenario> reference_scenario(const Scenario& scenario);

/// Simulates the reference scenario and returns its two-pulse echo.
std::optional<EchoPeak> reference_echo(const Scenario& scenario,
                                       unsigned threads = 0);

/// Runs the ensemble and extracts echoes. The designed echo (locked if B1
/// locks in time, else two-pulse) always gets a row; with a late B1 the
/// window after B2 is also searched and reported when above threshold.
/// `reference` overrides the internally simulated efficiency reference.
RunResult run(const Scenario& scenario, unsigned threads = 0,
              const std::optional<EchoPeak>& reference = std::nullopt);

struct ScanSpec {
  // "section.key" (e.g. pulse.B2.area, system.gamma12, pulse.B1.t) or
  // "storage": B2 time = B1 time + value.
  std::string path;
  std::vector<std::string> values;
};

struct ScanRow {
  std::string value;
  std::optional<double> t_echo;
  std::optional<double> efficiency;
  std::optional<double> magnitude;
};

struct ScanResult {
  ScanSpec spec;
  std::vector<ScanRow> rows;  // in value order
};

/// Returns a copy of `doc` with the scan parameter set to `value`. Throws
/// ConfigError when the path does not resolve.
Document apply_scan_value(const Document& doc, const std::string& path,
                          const std::string& value);

/// One run per value. The reference echo is simulated once per distinct
/// reference scenario.
ScanResult run_scan(const Document& doc, const ScanSpec& scan,
                    unsigned threads = 0);

std::string timeseries_csv(const RunResult& result);
std::string peaks_csv(const RunResult& result);
std::string scan_csv(const ScanResult& result);
std::string manifest_text(const Scenario& scenario);
std::string signal_svg(const RunResult& result);
std::string scan_svg(const ScanResult& result);

}  // namespace echolock
