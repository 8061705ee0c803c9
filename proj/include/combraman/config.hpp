#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "combraman/integrator.hpp"
#include "combraman/lambda_model.hpp"
#include "combraman/pulse_train.hpp"

namespace combraman {

enum class RunMode { Train, Blocks, Dressed, Spectrum };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& text);

struct SweepAxis {
  std::string key;  // a config key such as "pulse.omega0_thz"
  double from = 0.0;
  double to = 0.0;
  int count = 1;

  std::vector<double> values() const;
  bool operator==(const SweepAxis&) const = default;
};

/// Fully resolved scenario; every physical quantity in internal units
/// (fs, rad/fs, 1/fs).
struct ScenarioConfig {
  std::string name = "scenario";
  std::string source;  // free-text provenance, e.g. "preset:fig3-sine"
  RunMode mode = RunMode::Train;
  bool frequencies_are_angular = false;

  LevelSystem levels;
  PulseTrainParams pulse;
  double peak_rabi = 0.0;
  double bessel_threshold = 1e-12;
  DecoherenceRates rates;
  IntegratorConfig integrator;

  std::string initial_state = "1";  // "1", "3" or "2_q"
  std::optional<double> total_time;  // fs from the first window start
  int dressed_grid_points = 4096;
  int spectrum_points = 4096;

  std::string output_dir = "out";
  std::vector<SweepAxis> sweep;  // zero, one or two axes

  void validate() const;
  /// Basis index of `initial_state`.
  int initial_level() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses the key-value text format. Throws ParseError, ValidationError or
/// UnknownPreset.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Builds a config from a named scenario preset.
ScenarioConfig preset_config(const std::string& name, bool frequencies_are_angular = false);

/// Applies one "section.key=value" override to a resolved config.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Explicit form in internal units; parse_config(write_config(c)) == c.
std::string write_config(const ScenarioConfig& cfg);

/// Loads a preset or file and applies overrides in order. A
/// "frequencies_are_angular" override is honoured before preset expansion.
ScenarioConfig resolve_config(const std::optional<std::filesystem::path>& path,
                              const std::optional<std::string>& preset,
                              const std::vector<std::string>& overrides);

struct PresetInfo {
  std::string name;
  std::string kind;  // "scenario" or "levels"
  std::string description;
};

std::vector<PresetInfo> list_presets();

/// 17 significant digits, the format used for every numeric output.
std::string format_double(double value);

}  // namespace combraman
