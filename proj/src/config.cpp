#include "combraman/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "combraman/errors.hpp"
#include "combraman/units.hpp"

namespace combraman {
namespace {

struct Entry {
  std::string key;  // "section.key" or "key"
  std::string value;
  std::size_t line;
  std::size_t key_column;
  std::size_t value_column;
};

// Raised by value converters; the loader attaches a position to it.
struct BadValue {
  std::string message;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_number(const std::string& text) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) throw BadValue{"expected a number, got '" + text + "'"};
  if (!std::isfinite(value)) throw BadValue{"number must be finite"};
  return value;
}

int to_integer(const std::string& text) {
  int value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) throw BadValue{"expected an integer, got '" + text + "'"};
  return value;
}

bool to_bool(const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw BadValue{"expected true or false, got '" + text + "'"};
}

std::vector<Entry> tokenize(const std::string& text) {
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool any_content = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    any_content = true;
    const char lead = raw[first];
    if (lead == '#' || lead == ';') continue;
    if (lead == '[') {
      const auto close = raw.find(']', first);
      if (close == std::string::npos) throw ParseError("unterminated section header", line_no, first + 1);
      if (!trim(raw.substr(close + 1)).empty()) {
        throw ParseError("unexpected text after section header", line_no, close + 2);
      }
      section = trim(raw.substr(first + 1, close - first - 1));
      if (section.empty()) throw ParseError("empty section name", line_no, first + 2);
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, first + 1);
    const std::string key = trim(raw.substr(first, eq - first));
    if (key.empty()) throw ParseError("missing key before '='", line_no, first + 1);
    const auto value_start = raw.find_first_not_of(" \t", eq + 1);
    const std::string value = value_start == std::string::npos ? std::string{} : trim(raw.substr(value_start));
    if (value.empty()) throw ParseError("missing value for '" + key + "'", line_no, eq + 2);
    const std::string full = section.empty() ? key : section + "." + key;
    if (!seen.insert(full).second) throw ParseError("duplicate key '" + full + "'", line_no, first + 1);
    entries.push_back({full, value, line_no, first + 1, value_start + 1});
  }
  if (!any_content) throw ParseError("empty configuration", 1, 1);
  if (entries.empty()) throw ParseError("configuration has no entries", 1, 1);
  return entries;
}

bool has_prefix(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

// Frequency keys accept "_thz" (quoted convention) or "_rad_per_fs".
bool frequency(const std::string& key, const std::string& stem, const std::string& value, bool angular,
               double& out) {
  if (key == stem + "_thz") {
    out = units::thz_to_rad_per_fs(to_number(value), angular);
    return true;
  }
  if (key == stem + "_rad_per_fs") {
    out = to_number(value);
    return true;
  }
  return false;
}

bool rate(const std::string& key, const std::string& stem, const std::string& value, double& out) {
  if (key == stem + "_per_s") {
    out = units::per_second_to_per_fs(to_number(value));
    return true;
  }
  if (key == stem + "_per_fs") {
    out = to_number(value);
    return true;
  }
  return false;
}

bool duration(const std::string& key, const std::string& stem, const std::string& value, double& out) {
  if (key == stem + "_fs") {
    out = to_number(value);
    return true;
  }
  if (key == stem + "_ns") {
    out = to_number(value) * units::kFsPerNs;
    return true;
  }
  return false;
}

const std::map<std::string, std::string>& sweep_aliases() {
  static const std::map<std::string, std::string> aliases{
      {"A", "pulse.mod_amplitude"},  {"phi", "pulse.phi_rad"},     {"T0", "pulse.mod_time_fs"},
      {"omega0", "pulse.omega0_thz"}, {"peak_rabi", "pulse.peak_rabi_thz"}, {"period", "pulse.period_fs"},
  };
  return aliases;
}

bool sweepable(const std::string& key) {
  static const std::set<std::string> keys{
      "pulse.mod_amplitude",  "pulse.phi_rad",        "pulse.mod_time_fs",
      "pulse.omega0_thz",     "pulse.omega0_rad_per_fs", "pulse.peak_rabi_thz",
      "pulse.peak_rabi_rad_per_fs", "pulse.period_fs", "pulse.period_ns",
  };
  return keys.count(key) > 0;
}

std::string canonical_sweep_key(const std::string& name) {
  const auto& aliases = sweep_aliases();
  const auto it = aliases.find(name);
  return it == aliases.end() ? name : it->second;
}

SweepAxis& sweep_axis(ScenarioConfig& cfg, std::size_t index) {
  if (cfg.sweep.size() <= index) cfg.sweep.resize(index + 1);
  return cfg.sweep[index];
}

// Applies one key; returns the canonical quantity it sets (for duplicate and
// required-field checks). Throws BadValue or ValidationError.
std::string apply(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  const bool ang = cfg.frequencies_are_angular;
  double x = 0.0;

  if (key == "name") {
    cfg.name = value;
    return key;
  }
  if (key == "source") {
    cfg.source = value;
    return key;
  }
  if (key == "mode") {
    try {
      cfg.mode = run_mode_from_string(value);
    } catch (const ValidationError& e) {
      throw BadValue{e.what()};
    }
    return key;
  }
  if (key == "frequencies_are_angular") {
    cfg.frequencies_are_angular = to_bool(value);
    return key;
  }

  if (has_prefix(key, "levels.")) {
    const std::string k = key.substr(7);
    if (k == "preset") {
      const int m = cfg.levels.n_excited;
      cfg.levels = level_preset(value, ang);
      cfg.levels.n_excited = m;
      return "levels.preset";
    }
    if (frequency(k, "omega21", value, ang, x)) return cfg.levels.omega21 = x, "levels.omega21";
    if (frequency(k, "omega32", value, ang, x)) return cfg.levels.omega32 = x, "levels.omega32";
    if (frequency(k, "omega31", value, ang, x)) return cfg.levels.omega31 = x, "levels.omega31";
    if (frequency(k, "delta_omega", value, ang, x)) return cfg.levels.delta_omega = x, "levels.delta_omega";
    if (k == "n_excited") return cfg.levels.n_excited = to_integer(value), "levels.n_excited";
  } else if (has_prefix(key, "pulse.")) {
    const std::string k = key.substr(6);
    auto& p = cfg.pulse;
    if (k == "e0") return p.e0 = to_number(value), "pulse.e0";
    if (duration(k, "tau", value, x)) return p.tau = x, "pulse.tau";
    if (duration(k, "period", value, x)) return p.period = x, "pulse.period";
    if (k == "n_pulses") return p.n_pulses = to_integer(value), "pulse.n_pulses";
    if (frequency(k, "omega0", value, ang, x)) return p.omega0 = x, "pulse.omega0";
    if (k == "mod_amplitude") return p.mod_amplitude = to_number(value), "pulse.mod_amplitude";
    if (duration(k, "mod_time", value, x)) return p.mod_time = x, "pulse.mod_time";
    if (k == "phi_rad") return p.phi = to_number(value), "pulse.phi";
    if (frequency(k, "peak_rabi", value, ang, x)) return cfg.peak_rabi = x, "pulse.peak_rabi";
    if (k == "bessel_threshold") return cfg.bessel_threshold = to_number(value), "pulse.bessel_threshold";
  } else if (has_prefix(key, "rates.")) {
    const std::string k = key.substr(6);
    auto& r = cfg.rates;
    if (rate(k, "gamma1", value, x)) return r.gamma1 = x, "rates.gamma1";
    if (rate(k, "gamma2", value, x)) return r.gamma2 = x, "rates.gamma2";
    if (rate(k, "gamma3", value, x)) return r.gamma3 = x, "rates.gamma3";
    if (rate(k, "dephasing1", value, x)) return r.dephasing1 = x, "rates.dephasing1";
    if (rate(k, "dephasing2", value, x)) return r.dephasing2 = x, "rates.dephasing2";
    if (rate(k, "dephasing3", value, x)) return r.dephasing3 = x, "rates.dephasing3";
  } else if (has_prefix(key, "integrator.")) {
    const std::string k = key.substr(11);
    auto& c = cfg.integrator;
    if (k == "rel_tol") return c.rel_tol = to_number(value), key;
    if (k == "abs_tol") return c.abs_tol = to_number(value), key;
    if (duration(k, "max_step", value, x)) return c.max_step = x, "integrator.max_step";
    if (k == "sample_stride") return c.sample_stride = to_integer(value), key;
    if (k == "window_padding_tau") return c.window_padding = to_number(value), key;
    if (k == "max_samples") return c.max_samples = to_integer(value), key;
  } else if (has_prefix(key, "run.")) {
    const std::string k = key.substr(4);
    if (k == "initial_state") return cfg.initial_state = value, key;
    if (duration(k, "total_time", value, x)) return cfg.total_time = x, "run.total_time";
    if (k == "dressed_grid_points") return cfg.dressed_grid_points = to_integer(value), key;
    if (k == "spectrum_points") return cfg.spectrum_points = to_integer(value), key;
  } else if (key == "output.dir") {
    cfg.output_dir = value;
    return key;
  } else if (has_prefix(key, "sweep.")) {
    const std::string k = key.substr(6);
    const bool second = !k.empty() && k.back() == '2';
    const std::string stem = second ? k.substr(0, k.size() - 1) : k;
    const std::size_t axis = second ? 1 : 0;
    if (stem == "param") {
      const std::string target = canonical_sweep_key(value);
      if (!sweepable(target)) throw ValidationError(key, "'" + value + "' cannot be swept");
      sweep_axis(cfg, axis).key = target;
      return key;
    }
    if (stem == "from") return sweep_axis(cfg, axis).from = to_number(value), key;
    if (stem == "to") return sweep_axis(cfg, axis).to = to_number(value), key;
    if (stem == "count") return sweep_axis(cfg, axis).count = to_integer(value), key;
  }
  throw ValidationError(key, "unknown key");
}

bool physical_section(const std::string& key) {
  return has_prefix(key, "levels.") || has_prefix(key, "pulse.") || has_prefix(key, "rates.");
}

void require(const std::set<std::string>& set, const std::string& quantity) {
  if (set.count(quantity) == 0) throw ValidationError(quantity, "required when no preset is given");
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Train: return "train";
    case RunMode::Blocks: return "blocks";
    case RunMode::Dressed: return "dressed";
    case RunMode::Spectrum: return "spectrum";
  }
  return "train";
}

RunMode run_mode_from_string(const std::string& text) {
  if (text == "train") return RunMode::Train;
  if (text == "blocks") return RunMode::Blocks;
  if (text == "dressed") return RunMode::Dressed;
  if (text == "spectrum") return RunMode::Spectrum;
  throw ValidationError("mode", "expected train, blocks, dressed or spectrum, got '" + text + "'");
}

std::vector<double> SweepAxis::values() const {
  std::vector<double> out;
  if (count == 1) {
    out.push_back(from);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    out.push_back(i == count - 1 ? to : from + (to - from) * i / (count - 1));
  }
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

int ScenarioConfig::initial_level() const {
  if (initial_state == "1") return 0;
  if (initial_state == "3") return levels.n_excited + 1;
  if (has_prefix(initial_state, "2_")) {
    int q = 0;
    const std::string digits = initial_state.substr(2);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), q);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && q >= 1 && q <= levels.n_excited) return q;
  }
  throw ValidationError("run.initial_state", "expected 1, 3 or 2_q with 1 <= q <= n_excited");
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw ValidationError("name", "must not be empty");
  levels.validate();
  pulse.validate();
  rates.validate();
  integrator.validate();
  if (!std::isfinite(peak_rabi)) throw ValidationError("pulse.peak_rabi", "must be finite");
  if (!(bessel_threshold > 0.0 && bessel_threshold < 1.0)) {
    throw ValidationError("pulse.bessel_threshold", "must lie in (0, 1)");
  }
  (void)initial_level();
  if (total_time && !(*total_time > 0.0 && std::isfinite(*total_time))) {
    throw ValidationError("run.total_time", "must be > 0");
  }
  if (dressed_grid_points < 2) throw ValidationError("run.dressed_grid_points", "must be >= 2");
  if (spectrum_points < 2) throw ValidationError("run.spectrum_points", "must be >= 2");
  if (output_dir.empty()) throw ValidationError("output.dir", "must not be empty");
  if (sweep.size() > 2) throw ValidationError("sweep", "at most two swept parameters");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const auto& a = sweep[i];
    const std::string field = i == 0 ? "sweep" : "sweep (second axis)";
    if (a.key.empty()) throw ValidationError(field + ".param", "missing");
    if (!sweepable(a.key)) throw ValidationError(field + ".param", "'" + a.key + "' cannot be swept");
    if (a.count < 1) throw ValidationError(field + ".count", "must be >= 1");
    if (!std::isfinite(a.from) || !std::isfinite(a.to)) throw ValidationError(field, "range must be finite");
  }
  if (sweep.size() == 2 && sweep[0].key == sweep[1].key) {
    throw ValidationError("sweep.param2", "must differ from sweep.param");
  }
}

ScenarioConfig parse_config(const std::string& text) {
  const auto entries = tokenize(text);

  auto at_value = [](const Entry& e, const BadValue& bad) {
    return ParseError(e.key + ": " + bad.message, e.line, e.value_column);
  };

  bool angular = false;
  const Entry* preset = nullptr;
  for (const auto& e : entries) {
    if (e.key == "frequencies_are_angular") {
      try {
        angular = to_bool(e.value);
      } catch (const BadValue& bad) {
        throw at_value(e, bad);
      }
    }
    if (e.key == "preset") preset = &e;
  }

  ScenarioConfig cfg;
  if (preset != nullptr) {
    cfg = preset_config(preset->value, angular);
  }
  cfg.frequencies_are_angular = angular;

  // levels.preset must land before individual level keys override it.
  std::vector<const Entry*> ordered;
  for (const auto& e : entries) {
    if (e.key == "levels.preset") ordered.push_back(&e);
  }
  for (const auto& e : entries) {
    if (e.key != "levels.preset") ordered.push_back(&e);
  }

  std::set<std::string> quantities;
  for (const Entry* e : ordered) {
    if (e->key == "preset" || e->key == "frequencies_are_angular") continue;
    if (preset != nullptr && physical_section(e->key)) {
      throw ValidationError(e->key, "explicit physical parameters cannot be combined with preset '" +
                                        preset->value + "'; use --set overrides instead");
    }
    std::string quantity;
    try {
      quantity = apply(cfg, e->key, e->value);
    } catch (const BadValue& bad) {
      throw at_value(*e, bad);
    }
    if (!quantities.insert(quantity).second) {
      throw ValidationError(quantity, "given more than once (e.g. in two different units)");
    }
  }

  if (preset == nullptr) {
    if (quantities.count("levels.preset") == 0) {
      for (const char* q : {"levels.omega21", "levels.omega32", "levels.omega31", "levels.delta_omega"}) {
        require(quantities, q);
      }
    }
    for (const char* q : {"pulse.tau", "pulse.period", "pulse.n_pulses", "pulse.omega0", "pulse.mod_amplitude",
                          "pulse.mod_time", "pulse.phi", "pulse.peak_rabi"}) {
      require(quantities, q);
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  try {
    apply(cfg, key, value);
  } catch (const BadValue& bad) {
    throw ValidationError(key, bad.message);
  }
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError(assignment, "override must look like key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key.empty() || value.empty()) throw ValidationError(assignment, "override must look like key=value");
  apply_setting(cfg, key, value);
}

ScenarioConfig resolve_config(const std::optional<std::filesystem::path>& path,
                              const std::optional<std::string>& preset,
                              const std::vector<std::string>& overrides) {
  if (path.has_value() == preset.has_value()) {
    throw ValidationError("config", "give exactly one of a config file or a preset");
  }
  std::optional<bool> angular;
  std::vector<std::string> rest;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq != std::string::npos && trim(o.substr(0, eq)) == "frequencies_are_angular") {
      try {
        angular = to_bool(trim(o.substr(eq + 1)));
      } catch (const BadValue& bad) {
        throw ValidationError("frequencies_are_angular", bad.message);
      }
    } else {
      rest.push_back(o);
    }
  }

  ScenarioConfig cfg;
  if (preset) {
    cfg = preset_config(*preset, angular.value_or(false));
  } else {
    cfg = load_config(*path);
    if (angular && *angular != cfg.frequencies_are_angular) {
      if (!has_prefix(cfg.source, "preset:")) {
        throw ValidationError("frequencies_are_angular",
                              "can only be overridden for presets; edit the config file instead");
      }
      // Re-expand the preset under the other convention, keeping the file's
      // non-physical settings.
      ScenarioConfig flipped = preset_config(cfg.source.substr(7), *angular);
      flipped.name = cfg.name;
      flipped.mode = cfg.mode;
      flipped.integrator = cfg.integrator;
      flipped.initial_state = cfg.initial_state;
      flipped.total_time = cfg.total_time;
      flipped.dressed_grid_points = cfg.dressed_grid_points;
      flipped.spectrum_points = cfg.spectrum_points;
      flipped.output_dir = cfg.output_dir;
      flipped.sweep = cfg.sweep;
      cfg = flipped;
    }
  }
  for (const auto& o : rest) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

std::string write_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  auto num = [](double v) { return format_double(v); };
  out << "# combraman scenario, explicit form in internal units (fs, rad/fs, 1/fs)\n";
  out << "name = " << cfg.name << "\n";
  if (!cfg.source.empty()) out << "source = " << cfg.source << "\n";
  out << "mode = " << to_string(cfg.mode) << "\n";
  out << "frequencies_are_angular = " << (cfg.frequencies_are_angular ? "true" : "false") << "\n";

  out << "\n[levels]\n";
  out << "omega21_rad_per_fs = " << num(cfg.levels.omega21) << "\n";
  out << "omega32_rad_per_fs = " << num(cfg.levels.omega32) << "\n";
  out << "omega31_rad_per_fs = " << num(cfg.levels.omega31) << "\n";
  out << "delta_omega_rad_per_fs = " << num(cfg.levels.delta_omega) << "\n";
  out << "n_excited = " << cfg.levels.n_excited << "\n";

  out << "\n[pulse]\n";
  out << "e0 = " << num(cfg.pulse.e0) << "\n";
  out << "tau_fs = " << num(cfg.pulse.tau) << "\n";
  out << "period_fs = " << num(cfg.pulse.period) << "\n";
  out << "n_pulses = " << cfg.pulse.n_pulses << "\n";
  out << "omega0_rad_per_fs = " << num(cfg.pulse.omega0) << "\n";
  out << "mod_amplitude = " << num(cfg.pulse.mod_amplitude) << "\n";
  out << "mod_time_fs = " << num(cfg.pulse.mod_time) << "\n";
  out << "phi_rad = " << num(cfg.pulse.phi) << "\n";
  out << "peak_rabi_rad_per_fs = " << num(cfg.peak_rabi) << "\n";
  out << "bessel_threshold = " << num(cfg.bessel_threshold) << "\n";

  out << "\n[rates]\n";
  out << "gamma1_per_fs = " << num(cfg.rates.gamma1) << "\n";
  out << "gamma2_per_fs = " << num(cfg.rates.gamma2) << "\n";
  out << "gamma3_per_fs = " << num(cfg.rates.gamma3) << "\n";
  out << "dephasing1_per_fs = " << num(cfg.rates.dephasing1) << "\n";
  out << "dephasing2_per_fs = " << num(cfg.rates.dephasing2) << "\n";
  out << "dephasing3_per_fs = " << num(cfg.rates.dephasing3) << "\n";

  out << "\n[integrator]\n";
  out << "rel_tol = " << num(cfg.integrator.rel_tol) << "\n";
  out << "abs_tol = " << num(cfg.integrator.abs_tol) << "\n";
  out << "max_step_fs = " << num(cfg.integrator.max_step) << "\n";
  out << "sample_stride = " << cfg.integrator.sample_stride << "\n";
  out << "window_padding_tau = " << num(cfg.integrator.window_padding) << "\n";
  out << "max_samples = " << cfg.integrator.max_samples << "\n";

  out << "\n[run]\n";
  out << "initial_state = " << cfg.initial_state << "\n";
  if (cfg.total_time) out << "total_time_fs = " << num(*cfg.total_time) << "\n";
  out << "dressed_grid_points = " << cfg.dressed_grid_points << "\n";
  out << "spectrum_points = " << cfg.spectrum_points << "\n";

  out << "\n[output]\n";
  out << "dir = " << cfg.output_dir << "\n";

  if (!cfg.sweep.empty()) {
    out << "\n[sweep]\n";
    for (std::size_t i = 0; i < cfg.sweep.size(); ++i) {
      const std::string suffix = i == 0 ? "" : "2";
      const auto& a = cfg.sweep[i];
      out << "param" << suffix << " = " << a.key << "\n";
      out << "from" << suffix << " = " << num(a.from) << "\n";
      out << "to" << suffix << " = " << num(a.to) << "\n";
      out << "count" << suffix << " = " << a.count << "\n";
    }
  }
  return out.str();
}

}  // namespace combraman
