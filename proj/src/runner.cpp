#include "echolock/runner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "echolock/errors.hpp"
#include "echolock/number_format.hpp"
#include "echolock/svg.hpp"

#ifndef ECHOLOCK_VERSION
#define ECHOLOCK_VERSION "dev"
#endif

namespace echolock {
namespace {

std::string opt_number(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

EchoRow measure(const EnsembleTrajectory& traj, const PulseSequence& seq,
                std::string kind, double t_predicted, double lo, double hi,
                double threshold) {
  EchoRow row;
  row.kind = std::move(kind);
  row.t_predicted = t_predicted;
  row.window_lo = lo;
  row.window_hi = hi;
  if (hi > lo && lo < seq.window_end) {
    row.peak = detect_echo(traj, lo, hi);
    row.detected = row.peak && row.peak->magnitude >= threshold;
  }
  return row;
}

double fid_peak(const EnsembleTrajectory& traj, const PulseSequence& seq) {
  double lo = 0.0;
  double hi = seq.window_end;
  if (const PulseEvent* d = seq.find("D")) {
    lo = d->t_off();
    for (const PulseEvent& p : seq.events) {
      if (p.t_on >= lo && &p != d) hi = std::min(hi, p.t_on);
    }
  }
  double best = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (traj.times[k] >= lo - 1e-9 && traj.times[k] <= hi + 1e-9) {
      best = std::max(best, std::abs(traj.signal[k]));
    }
  }
  return best;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

const char* version() { return ECHOLOCK_VERSION; }

std::optional<Scenario> reference_scenario(const Scenario& scenario) {
  const ScenarioPulse* d = scenario.pulse("D");
  const ScenarioPulse* r = scenario.pulse("R");
  if (d == nullptr || r == nullptr) return std::nullopt;
  Scenario ref = scenario;
  ref.pulses = {*d, *r};
  ref.system.gamma12 = 0.0;
  ref.output.t_end = 0.0;
  ref.output.coherences.clear();
  return ref;
}

std::optional<EchoPeak> reference_echo(const Scenario& scenario,
                                       unsigned threads) {
  const auto ref = reference_scenario(scenario);
  if (!ref) return std::nullopt;
  const PulseSequence seq = ref->sequence();
  EnsembleOptions opt;
  opt.sample_period = ref->output.sample_period;
  opt.threads = threads;
  opt.check_integrity = false;
  const EnsembleTrajectory traj =
      run_ensemble(seq, ref->detuning_grid(), ref->system, ref->integrator, opt);
  const double te = *seq.conventional_echo_time();
  const auto [lo, hi] = echo_window(seq, te, ref->output.echo_half_width);
  return detect_echo(traj, lo, hi);
}

RunResult run(const Scenario& scenario, unsigned threads,
              const std::optional<EchoPeak>& reference) {
  RunResult res;
  res.scenario = scenario;
  res.sequence = scenario.sequence();
  res.grid = scenario.detuning_grid();

  EnsembleOptions opt;
  opt.sample_period = scenario.output.sample_period;
  opt.threads = threads;
  for (double d : scenario.output.coherences) {
    opt.tracked_groups.push_back(static_cast<std::size_t>(res.grid.index_of(d)));
  }
  res.trajectory = run_ensemble(res.sequence, res.grid, scenario.system,
                                scenario.integrator, opt);
  res.fid_peak = fid_peak(res.trajectory, res.sequence);
  const double threshold = scenario.output.echo_threshold * res.fid_peak;
  const double half = scenario.output.echo_half_width;
  const PulseSequence& seq = res.sequence;

  if (const auto te = seq.predicted_echo_time()) {
    const auto [lo, hi] = echo_window(seq, *te, half);
    res.echoes.push_back(measure(res.trajectory, seq,
                                 seq.locks() ? "locked" : "conventional", *te,
                                 lo, hi, threshold));

    const bool only_d_r = seq.events.size() == 2 && seq.has("D") && seq.has("R");
    if (reference) {
      res.reference = reference;
    } else if (only_d_r && scenario.system.gamma12 == 0.0) {
      res.reference = res.echoes.front().peak;
    } else {
      res.reference = reference_echo(scenario, threads);
    }
    if (res.reference && res.reference->magnitude > 0.0 &&
        res.echoes.front().peak) {
      res.echoes.front().efficiency =
          signed_efficiency(*res.echoes.front().peak, *res.reference);
    }
  }

  if (const PulseEvent* b2 = seq.find("B2"); b2 && !seq.locks()) {
    const double lo = b2->t_off();
    const double hi = std::min(seq.window_end, lo + 2.0 * half);
    EchoRow row = measure(res.trajectory, seq, "post_b2", std::nan(""), lo, hi,
                          threshold);
    if (row.detected) {
      if (res.reference && res.reference->magnitude > 0.0) {
        row.efficiency = signed_efficiency(*row.peak, *res.reference);
      }
      res.echoes.push_back(std::move(row));
    }
  }
  return res;
}

Document apply_scan_value(const Document& doc, const std::string& path,
                          const std::string& value) {
  Document out = doc;
  if (path == "storage") {
    const std::string* b1t = doc.get("pulse.B1", "t");
    const std::string* b1on = doc.get("pulse.B1", "t_on");
    if ((b1t == nullptr && b1on == nullptr) || doc.find("pulse.B2") == nullptr) {
      throw ConfigError("scan path 'storage' needs pulses B1 and B2");
    }
    double storage = 0.0;
    try {
      storage = parse_double(value);
    } catch (const std::invalid_argument&) {
      throw ConfigError("storage value '" + value + "' is not a number");
    }
    const std::string key = b1t ? "t" : "t_on";
    const double b1 = parse_double(b1t ? *b1t : *b1on);
    out.erase("pulse.B2", "t");
    out.erase("pulse.B2", "t_on");
    out.set("pulse.B2", key, format_double(b1 + storage));
    return out;
  }

  const std::size_t dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("scan path '" + path + "' must look like section.key");
  }
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  const bool builtin = section == "system" || section == "grid" ||
                       section == "integrator" || section == "output";
  if (!builtin && doc.find(section) == nullptr) {
    throw ConfigError("scan path '" + path + "': no section [" + section + "]");
  }
  // Keep mutually exclusive pulse keys consistent.
  if (key == "t") out.erase(section, "t_on");
  if (key == "t_on") out.erase(section, "t");
  if (key == "area") out.erase(section, "duration");
  if (key == "duration") out.erase(section, "area");
  out.set(section, key, value);
  return out;
}

ScanResult run_scan(const Document& doc, const ScanSpec& scan,
                    unsigned threads) {
  if (scan.values.empty()) throw ConfigError("scan needs at least one value");
  ScanResult result;
  result.spec = scan;

  // Validate every value before spending time on simulations.
  std::vector<Scenario> scenarios;
  for (const std::string& v : scan.values) {
    try {
      scenarios.push_back(scenario_from_document(apply_scan_value(doc, scan.path, v)));
    } catch (const ConfigError& e) {
      throw ConfigError("scan " + scan.path + " = " + v + ": " + e.what());
    }
  }

  std::map<std::string, std::optional<EchoPeak>> references;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const Scenario& sc = scenarios[i];
    std::optional<EchoPeak> ref;
    if (const auto ref_sc = reference_scenario(sc)) {
      const std::string key = write_scenario(*ref_sc);
      auto it = references.find(key);
      if (it == references.end()) {
        it = references.emplace(key, reference_echo(sc, threads)).first;
      }
      ref = it->second;
    }
    const RunResult r = run(sc, threads, ref);
    ScanRow row;
    row.value = scan.values[i];
    if (!r.echoes.empty() && r.echoes.front().peak) {
      const EchoRow& e = r.echoes.front();
      row.t_echo = e.peak->t_peak;
      row.magnitude = e.peak->magnitude;
      row.efficiency = e.efficiency;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string timeseries_csv(const RunResult& r) {
  std::ostringstream o;
  o << "t_us,re_S,im_S,abs_S,pop1_avg,pop2_avg,pop3_avg";
  for (const GroupTrace& g : r.trajectory.tracked) {
    const std::string d = format_double(g.delta);
    o << ",re_rho13_" << d << "kHz,im_rho13_" << d << "kHz";
  }
  o << '\n';
  const EnsembleTrajectory& t = r.trajectory;
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    o << format_double(t.times[k]) << ',' << format_double(t.signal[k].real())
      << ',' << format_double(t.signal[k].imag()) << ','
      << format_double(std::abs(t.signal[k])) << ','
      << format_double(t.populations[k][0]) << ','
      << format_double(t.populations[k][1]) << ','
      << format_double(t.populations[k][2]);
    for (const GroupTrace& g : t.tracked) {
      const cplx c = g.trajectory.states[k](0, 2);
      o << ',' << format_double(c.real()) << ',' << format_double(c.imag());
    }
    o << '\n';
  }
  return o.str();
}

std::string peaks_csv(const RunResult& r) {
  std::ostringstream o;
  o << "kind,t_predicted_us,window_lo_us,window_hi_us,t_peak_us,re_S,im_S,"
       "abs_S,efficiency_pct,detected\n";
  for (const EchoRow& e : r.echoes) {
    o << e.kind << ','
      << (std::isnan(e.t_predicted) ? std::string() : format_double(e.t_predicted))
      << ',' << format_double(e.window_lo) << ',' << format_double(e.window_hi)
      << ',';
    if (e.peak) {
      o << format_double(e.peak->t_peak) << ','
        << format_double(e.peak->amplitude.real()) << ','
        << format_double(e.peak->amplitude.imag()) << ','
        << format_double(e.peak->magnitude);
    } else {
      o << ",,,";
    }
    o << ',' << opt_number(e.efficiency) << ',' << (e.detected ? 1 : 0) << '\n';
  }
  return o.str();
}

std::string scan_csv(const ScanResult& s) {
  std::ostringstream o;
  o << csv_field(s.spec.path) << ",t_echo_us,efficiency_pct,magnitude\n";
  for (const ScanRow& row : s.rows) {
    o << csv_field(row.value) << ',' << opt_number(row.t_echo) << ','
      << opt_number(row.efficiency) << ',' << opt_number(row.magnitude) << '\n';
  }
  return o.str();
}

std::string manifest_text(const Scenario& scenario) {
  return write_scenario(scenario, std::string("echolock ") + version() +
                                      " run manifest\n"
                                      "re-run with: echolock run <this file>");
}

std::string signal_svg(const RunResult& r) {
  Series s{"|S(t)|", r.trajectory.times, {}};
  s.y.reserve(r.trajectory.signal.size());
  for (const cplx& c : r.trajectory.signal) s.y.push_back(std::abs(c));
  const Series series[] = {s};
  return emit_svg(series, {"Macroscopic coherence", "t (us)", "|S|"});
}

std::string scan_svg(const ScanResult& s) {
  Series eff{"efficiency (%)", {}, {}};
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    if (!s.rows[i].efficiency) continue;
    double x = static_cast<double>(i);
    try {
      x = parse_double(s.rows[i].value);
    } catch (const std::invalid_argument&) {
      try {
        x = parse_area(s.rows[i].value);
      } catch (const ConfigError&) {
      }
    }
    eff.x.push_back(x);
    eff.y.push_back(*s.rows[i].efficiency);
  }
  if (eff.x.empty()) throw ConfigError("scan produced no efficiencies to plot");
  const Series series[] = {eff};
  return emit_svg(series, {"Scan of " + s.spec.path, s.spec.path, "signed efficiency (%)"});
}

}  // namespace echolock
