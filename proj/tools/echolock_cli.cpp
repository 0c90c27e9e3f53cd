// echolock: run, scan and validate phase-locked photon echo scenarios.
//
// Exit codes: 0 success, 2 scenario/usage error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "echolock/errors.hpp"
#include "echolock/number_format.hpp"
#include "echolock/runner.hpp"

namespace fs = std::filesystem;
using namespace echolock;

namespace {

constexpr int kExitScenario = 2;
constexpr int kExitNumerical = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::vector<std::string> split_values(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

unsigned default_threads() {
  if (const char* env = std::getenv("SIM_THREADS")) {
    try {
      const double n = parse_double(env);
      if (n >= 0 && n == static_cast<unsigned>(n)) return static_cast<unsigned>(n);
    } catch (const std::invalid_argument&) {
    }
    std::cerr << "warning: ignoring SIM_THREADS='" << env << "'\n";
  }
  return 0;
}

void print_warnings(const PulseSequence& seq) {
  for (const std::string& w : seq.warnings) std::cerr << "warning: " << w << '\n';
}

void print_classification(const Scenario& sc) {
  const ScenarioPulse* r = sc.pulse("R");
  const ScenarioPulse* b1 = sc.pulse("B1");
  const ScenarioPulse* b2 = sc.pulse("B2");
  if (!r || !b1 || !b2) return;
  const double ar = r->event.area, a1 = b1->event.area, a2 = b2->event.area;
  if (const auto c = classify_areas(ar, a1, a2)) {
    std::cout << "area rule: " << to_string(*c) << '\n';
  } else {
    std::cout << "area rule: no exact rule; nearest integer areas give "
              << to_string(classify_areas_nearest(ar, a1, a2)) << " (advisory)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-locked photon echo simulator"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_dir = ".";
  std::string format = "csv";
  unsigned threads = default_threads();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"csv", "svg", "both"}))
      ->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (0 = all cores; default $SIM_THREADS)");

  std::string scenario_path;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and extract echoes");
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

  std::string param;
  std::string values;
  auto* scan_cmd = app.add_subcommand("scan", "Repeat a scenario over parameter values");
  scan_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  scan_cmd->add_option("--param", param,
                       "Parameter path, e.g. pulse.B2.area, system.gamma12, storage")
      ->required();
  scan_cmd->add_option("--values", values, "Comma-separated values, e.g. pi,2pi,3pi")
      ->required();

  auto* validate_cmd = app.add_subcommand("validate", "Parse and check a scenario");
  validate_cmd->add_option("scenario", scenario_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitScenario;
  }

  const bool want_csv = format != "svg";
  const bool want_svg = format != "csv";

  try {
    const std::string text = read_file(scenario_path);

    if (*validate_cmd) {
      const Scenario sc = parse_scenario(text);
      const PulseSequence seq = sc.sequence();
      print_warnings(seq);
      std::cout << "ok: " << seq.events.size() << " pulses, window 0-"
                << format_double(seq.window_end) << " us\n";
      if (auto te = seq.predicted_echo_time()) {
        std::cout << (seq.locks() ? "locked" : "two-pulse")
                  << " echo predicted at " << format_double(*te) << " us\n";
      }
      print_classification(sc);
      return 0;
    }

    fs::create_directories(out_dir);

    if (*run_cmd) {
      const Scenario sc = parse_scenario(text);
      print_warnings(sc.sequence());
      const RunResult res = run(sc, threads);
      write_file(fs::path(out_dir) / "manifest.ini", manifest_text(sc));
      write_file(fs::path(out_dir) / "peaks.csv", peaks_csv(res));
      if (want_csv) write_file(fs::path(out_dir) / "timeseries.csv", timeseries_csv(res));
      if (want_svg) write_file(fs::path(out_dir) / "signal.svg", signal_svg(res));
      for (const EchoRow& e : res.echoes) {
        std::cout << e.kind << ": ";
        if (e.peak) {
          std::cout << "t = " << format_fixed(e.peak->t_peak, 4)
                    << " us, |S| = " << format_double(e.peak->magnitude);
          if (e.efficiency) std::cout << ", efficiency " << format_fixed(*e.efficiency, 2) << " %";
          if (!e.detected) std::cout << " (below threshold)";
        } else {
          std::cout << "none";
        }
        std::cout << '\n';
      }
      return 0;
    }

    if (*scan_cmd) {
      const Document doc = parse_document(text);
      const ScanResult res = run_scan(doc, {param, split_values(values)}, threads);
      if (want_csv) write_file(fs::path(out_dir) / "scan.csv", scan_csv(res));
      if (want_svg) write_file(fs::path(out_dir) / "scan.svg", scan_svg(res));
      std::cout << scan_csv(res);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return kExitScenario;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
