#include "echolock/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "echolock/errors.hpp"
#include "echolock/number_format.hpp"

namespace echolock {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Reads typed values out of one section, remembering which keys were used so
// leftovers can be reported as unknown.
class SectionReader {
 public:
  SectionReader(const Document::Section* section, std::string name)
      : section_(section), name_(std::move(name)) {}

  const std::string* raw(const std::string& key) {
    used_.insert(key);
    if (section_ == nullptr) return nullptr;
    for (const auto& [k, v] : section_->entries) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  bool has(const std::string& key) { return raw(key) != nullptr; }

  double number(const std::string& key, double fallback) {
    const std::string* v = raw(key);
    return v ? to_number(key, *v) : fallback;
  }

  double required_number(const std::string& key) {
    const std::string* v = raw(key);
    if (v == nullptr) fail(key, "is required");
    return to_number(key, *v);
  }

  double non_negative(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x >= 0.0)) fail(key, "must be >= 0, got " + format_double(x));
    return x;
  }

  double positive(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) fail(key, "must be > 0, got " + format_double(x));
    return x;
  }

  double to_number(const std::string& key, const std::string& v) {
    try {
      const double x = parse_double(v);
      if (!std::isfinite(x)) fail(key, "must be finite");
      return x;
    } catch (const std::invalid_argument&) {
      fail(key, "expects a number, got '" + v + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("[" + name_ + "] " + key + " " + what);
  }

  void reject_unknown() const {
    if (section_ == nullptr) return;
    for (const auto& [k, v] : section_->entries) {
      if (!used_.count(k)) {
        throw ConfigError("[" + name_ + "] unknown key '" + k + "'");
      }
    }
  }

 private:
  const Document::Section* section_;
  std::string name_;
  std::set<std::string> used_;
};

ScenarioPulse read_pulse(const Document::Section& section,
                         const std::string& label) {
  SectionReader r(&section, section.name);
  ScenarioPulse sp;
  PulseEvent& p = sp.event;
  p.label = label;

  const auto canonical = canonical_transition(label);
  if (const std::string* t = r.raw("transition")) {
    const std::string v = lower(trim(*t));
    if (v == "opt13") {
      p.transition = Transition::Opt13;
    } else if (v == "opt23") {
      p.transition = Transition::Opt23;
    } else {
      r.fail("transition", "must be opt13 or opt23, got '" + *t + "'");
    }
  } else if (canonical) {
    p.transition = *canonical;
  } else {
    r.fail("transition", "is required for custom pulse labels");
  }

  p.rabi = r.required_number("rabi");
  if (!(p.rabi > 0.0)) r.fail("rabi", "must be > 0, got " + format_double(p.rabi));
  p.phase = r.number("phase", 0.0);

  const std::string* area = r.raw("area");
  const std::string* duration = r.raw("duration");
  if ((area != nullptr) == (duration != nullptr)) {
    r.fail("area", "or duration must be given (exactly one)");
  }
  if (area != nullptr) {
    try {
      p.area = parse_area(*area);
    } catch (const ConfigError& e) {
      r.fail("area", e.what());
    }
    p.duration = area_to_duration(p.area, p.rabi);
    sp.by_area = true;
  } else {
    p.duration = r.non_negative("duration", 0.0);
    p.area = 2.0 * p.rabi * p.duration;
    sp.by_area = false;
  }

  const bool has_t = r.has("t");
  const bool has_t_on = r.has("t_on");
  if (has_t == has_t_on) r.fail("t", "or t_on must be given (exactly one)");
  sp.by_center = has_t;
  sp.time = has_t ? r.required_number("t") : r.required_number("t_on");
  p.t_on = has_t ? sp.time - 0.5 * p.duration : sp.time;
  if (p.t_on < 0.0) r.fail(has_t ? "t" : "t_on", "puts the pulse before t = 0");

  r.reject_unknown();
  return sp;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view t = trim(item);
    if (t.empty()) continue;
    out.push_back(parse_double(t));
  }
  return out;
}

std::string area_text(double area) {
  return area == 0.0 ? "0" : format_double(area) + "pi";
}

}  // namespace

const Document::Section* Document::find(std::string_view name) const {
  for (const Section& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const std::string* Document::get(std::string_view section,
                                 std::string_view key) const {
  const Section* s = find(section);
  if (s == nullptr) return nullptr;
  for (const auto& [k, v] : s->entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

void Document::set(const std::string& section, const std::string& key,
                   const std::string& value) {
  auto it = std::find_if(sections.begin(), sections.end(),
                         [&](const Section& s) { return s.name == section; });
  if (it == sections.end()) {
    sections.push_back({section, {}});
    it = std::prev(sections.end());
  }
  for (auto& [k, v] : it->entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  it->entries.emplace_back(key, value);
}

void Document::erase(const std::string& section, const std::string& key) {
  for (Section& s : sections) {
    if (s.name != section) continue;
    std::erase_if(s.entries, [&](const auto& kv) { return kv.first == key; });
  }
}

Document parse_document(std::string_view text) {
  Document doc;
  Document::Section* current = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const std::size_t c = line.find_first_of("#;"); c != std::string_view::npos) {
      line = line.substr(0, c);
    }
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigError(where + "empty section name");
      if (doc.find(name) != nullptr) {
        throw ConfigError(where + "duplicate section [" + name + "]");
      }
      doc.sections.push_back({name, {}});
      current = &doc.sections.back();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(where + "expected 'key = value'");
    }
    if (current == nullptr) throw ConfigError(where + "key outside any section");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where + "empty key");
    for (const auto& [k, v] : current->entries) {
      if (k == key) {
        throw ConfigError(where + "duplicate key '" + key + "' in [" +
                          current->name + "]");
      }
    }
    current->entries.emplace_back(key, value);
  }
  return doc;
}

double parse_area(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  const std::size_t at = s.find("pi");
  if (at == std::string::npos) {
    // Only an explicit zero may omit the unit.
    try {
      if (parse_double(s) == 0.0) return 0.0;
    } catch (const std::invalid_argument&) {
    }
    throw ConfigError("'" + std::string(text) +
                      "' must be written in units of pi (e.g. 3pi, pi/2)");
  }
  std::string coeff = s.substr(0, at);
  std::string rest = s.substr(at + 2);
  if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
  double value = 1.0;
  try {
    if (!coeff.empty()) value = parse_double(coeff);
    if (!rest.empty()) {
      if (rest.front() != '/') throw std::invalid_argument(rest);
      value /= parse_double(rest.substr(1));
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot parse '" + std::string(text) + "'");
  }
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ConfigError("'" + std::string(text) + "' must be >= 0");
  }
  return value;
}

Scenario scenario_from_document(const Document& doc) {
  Scenario sc;
  for (const Document::Section& s : doc.sections) {
    const bool known = s.name == "system" || s.name == "grid" ||
                       s.name == "integrator" || s.name == "output" ||
                       (s.name.rfind("pulse.", 0) == 0 && s.name.size() > 6);
    if (!known) throw ConfigError("unknown section [" + s.name + "]");
  }

  {
    SectionReader r(doc.find("system"), "system");
    SystemParams& p = sc.system;
    p.gamma13 = r.non_negative("gamma13", 0.0);
    p.gamma23 = r.non_negative("gamma23", 0.0);
    p.gamma12 = r.non_negative("gamma12", 0.0);
    p.Gamma31 = r.non_negative("Gamma31", 0.0);
    p.Gamma32 = r.non_negative("Gamma32", 0.0);
    p.Gamma12 = r.non_negative("Gamma12", 0.0);
    const double sign = r.number("detuning_sign", -1.0);
    if (sign != 1.0 && sign != -1.0) r.fail("detuning_sign", "must be -1 or 1");
    p.detuning_sign = static_cast<int>(sign);
    r.reject_unknown();
  }
  {
    SectionReader r(doc.find("grid"), "grid");
    sc.grid.fwhm = r.positive("fwhm", 680.0);
    sc.grid.spacing = r.positive("spacing", 10.0);
    const double count = r.number("count", 161.0);
    if (count != std::floor(count) || count < 1 || std::fmod(count, 2.0) == 0.0) {
      r.fail("count", "must be a positive odd integer");
    }
    sc.grid.count = static_cast<int>(count);
    r.reject_unknown();
  }
  {
    SectionReader r(doc.find("integrator"), "integrator");
    sc.integrator.dt_pulse = r.positive("dt_pulse", 0.0005);
    sc.integrator.dt_free = r.positive("dt_free", 0.01);
    if (const std::string* m = r.raw("method"); m && lower(*m) != "rk4") {
      r.fail("method", "must be rk4");
    }
    try {
      sc.integrator.validate();
    } catch (const ConfigError& e) {
      r.fail("dt_pulse", e.what());
    }
    r.reject_unknown();
  }
  {
    SectionReader r(doc.find("output"), "output");
    sc.output.sample_period = r.positive("sample_period", 0.01);
    sc.output.t_end = r.non_negative("t_end", 0.0);
    sc.output.echo_half_width = r.positive("echo_half_width", 2.0);
    sc.output.echo_threshold = r.non_negative("echo_threshold", 0.02);
    if (const std::string* c = r.raw("coherences")) {
      try {
        sc.output.coherences = parse_list(*c);
      } catch (const std::invalid_argument&) {
        r.fail("coherences", "expects a comma-separated list of kHz values");
      }
    }
    r.reject_unknown();
  }

  for (const Document::Section& s : doc.sections) {
    if (s.name.rfind("pulse.", 0) != 0) continue;
    sc.pulses.push_back(read_pulse(s, s.name.substr(6)));
  }
  if (sc.pulses.empty()) throw ConfigError("scenario defines no pulses");

  // Structural checks: sequence rules, grid membership of coherence probes.
  (void)sc.sequence();
  const DetuningGrid grid = sc.detuning_grid();
  for (double d : sc.output.coherences) {
    if (grid.index_of(d) < 0) {
      throw ConfigError("[output] coherences: " + format_double(d) +
                        " kHz is not a grid detuning");
    }
  }
  return sc;
}

Scenario parse_scenario(std::string_view text) {
  return scenario_from_document(parse_document(text));
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

PulseSequence Scenario::sequence() const {
  std::vector<PulseEvent> events;
  events.reserve(pulses.size());
  for (const ScenarioPulse& p : pulses) events.push_back(p.event);
  return build_sequence(std::move(events), output.t_end);
}

DetuningGrid Scenario::detuning_grid() const {
  return build_grid(grid.fwhm, grid.spacing, grid.count);
}

const ScenarioPulse* Scenario::pulse(const std::string& label) const {
  for (const ScenarioPulse& p : pulses) {
    if (p.event.label == label) return &p;
  }
  return nullptr;
}

std::string write_scenario(const Scenario& sc, std::string_view header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) {
    std::istringstream lines{std::string(header_comment)};
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
    out << '\n';
  }
  const SystemParams& p = sc.system;
  out << "[system]\n"
      << "gamma13 = " << format_double(p.gamma13) << '\n'
      << "gamma23 = " << format_double(p.gamma23) << '\n'
      << "gamma12 = " << format_double(p.gamma12) << '\n'
      << "Gamma31 = " << format_double(p.Gamma31) << '\n'
      << "Gamma32 = " << format_double(p.Gamma32) << '\n'
      << "Gamma12 = " << format_double(p.Gamma12) << '\n'
      << "detuning_sign = " << p.detuning_sign << "\n\n";
  out << "[grid]\n"
      << "fwhm = " << format_double(sc.grid.fwhm) << '\n'
      << "spacing = " << format_double(sc.grid.spacing) << '\n'
      << "count = " << sc.grid.count << "\n\n";
  for (const ScenarioPulse& sp : sc.pulses) {
    const PulseEvent& e = sp.event;
    out << "[pulse." << e.label << "]\n"
        << "transition = " << to_string(e.transition) << '\n'
        << "rabi = " << format_double(e.rabi) << '\n';
    if (sp.by_area) {
      out << "area = " << area_text(e.area) << '\n';
    } else {
      out << "duration = " << format_double(e.duration) << '\n';
    }
    out << (sp.by_center ? "t = " : "t_on = ") << format_double(sp.time) << '\n'
        << "phase = " << format_double(e.phase) << "\n\n";
  }
  out << "[integrator]\n"
      << "method = rk4\n"
      << "dt_pulse = " << format_double(sc.integrator.dt_pulse) << '\n'
      << "dt_free = " << format_double(sc.integrator.dt_free) << "\n\n";
  out << "[output]\n"
      << "sample_period = " << format_double(sc.output.sample_period) << '\n'
      << "t_end = " << format_double(sc.output.t_end) << '\n'
      << "echo_half_width = " << format_double(sc.output.echo_half_width) << '\n'
      << "echo_threshold = " << format_double(sc.output.echo_threshold) << '\n';
  if (!sc.output.coherences.empty()) {
    out << "coherences = ";
    for (std::size_t i = 0; i < sc.output.coherences.size(); ++i) {
      out << (i ? ", " : "") << format_double(sc.output.coherences[i]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace echolock
