#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "combraman/config.hpp"
#include "combraman/errors.hpp"
#include "combraman/units.hpp"

namespace combraman {
namespace {

// Quoted transition frequencies in THz, needed for T0 = 1/nu21.
constexpr double kSh08Nu21 = 340.7;
constexpr double kNi08Nu21 = 309.3;

ScenarioConfig comb_scenario(const std::string& levels_name, double nu21, double phi, bool angular) {
  ScenarioConfig cfg;
  cfg.frequencies_are_angular = angular;
  cfg.levels = level_preset(levels_name, angular);
  cfg.pulse.e0 = 1.0;
  cfg.pulse.tau = 3.0;
  cfg.pulse.period = 19.2 * units::kFsPerNs;
  cfg.pulse.n_pulses = 32;
  cfg.pulse.omega0 = cfg.levels.omega32;
  cfg.pulse.mod_amplitude = 4.0;
  cfg.pulse.mod_time = 1000.0 / nu21;
  cfg.pulse.phi = phi;
  cfg.peak_rabi = cfg.levels.omega31;
  return cfg;
}

ScenarioConfig sh08(double phi, bool angular) { return comb_scenario("krb-sh08", kSh08Nu21, phi, angular); }

ScenarioConfig caption_rabi(ScenarioConfig cfg) {
  cfg.peak_rabi = units::thz_to_rad_per_fs(7.0, cfg.frequencies_are_angular);
  return cfg;
}

ScenarioConfig decoherence(ScenarioConfig cfg) {
  cfg.peak_rabi = units::thz_to_rad_per_fs(70.0, cfg.frequencies_are_angular);
  cfg.rates.gamma1 = units::per_second_to_per_fs(1e8);
  cfg.rates.gamma2 = units::per_second_to_per_fs(1e8);
  cfg.rates.dephasing1 = units::per_second_to_per_fs(1e4);
  cfg.rates.dephasing2 = units::per_second_to_per_fs(1e4);
  cfg.rates.dephasing3 = units::per_second_to_per_fs(1e4);
  return cfg;
}

ScenarioConfig dressed(double phi, bool angular) {
  ScenarioConfig cfg = comb_scenario("krb-ni08", kNi08Nu21, phi, angular);
  cfg.mode = RunMode::Dressed;
  cfg.levels.n_excited = 1;
  cfg.pulse.n_pulses = 1;
  cfg.peak_rabi = units::thz_to_rad_per_fs(125.5, angular);
  return cfg;
}

ScenarioConfig spectrum(double phi, bool angular) {
  ScenarioConfig cfg = sh08(phi, angular);
  cfg.mode = RunMode::Spectrum;
  cfg.pulse.n_pulses = 1;
  return cfg;
}

struct PresetEntry {
  std::string kind;
  std::string description;
  std::function<ScenarioConfig(bool)> build;
};

const std::map<std::string, PresetEntry>& registry() {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  static const std::map<std::string, PresetEntry> presets{
      {"krb-sh08",
       {"levels", "Sh08 level set (340.7 / 410.7 / 70 THz); as a scenario, the fig3-text train",
        [](bool a) { return sh08(0.0, a); }}},
      {"krb-ni08",
       {"levels", "Ni08 level set (309.3 / 434.8 / 125.5 THz); as a scenario, the 32-pulse sine train",
        [](bool a) { return comb_scenario("krb-ni08", kNi08Nu21, 0.0, a); }}},
      {"fig3-sine",
       {"scenario", "32-pulse sine train, Sh08, peak Rabi = omega31 (alias of fig3-text)",
        [](bool a) { return sh08(0.0, a); }}},
      {"fig3-text",
       {"scenario", "32-pulse sine train, Sh08, peak Rabi = omega31", [](bool a) { return sh08(0.0, a); }}},
      {"fig3-caption",
       {"scenario", "32-pulse sine train, Sh08, peak Rabi = 7 THz",
        [](bool a) { return caption_rabi(sh08(0.0, a)); }}},
      {"fig5-cosine",
       {"scenario", "32-pulse cosine train (phi = pi/2), Sh08, peak Rabi = omega31",
        [kHalfPi](bool a) { return sh08(kHalfPi, a); }}},
      {"fig5-caption",
       {"scenario", "32-pulse cosine train, Sh08, peak Rabi = 7 THz",
        [kHalfPi](bool a) { return caption_rabi(sh08(kHalfPi, a)); }}},
      {"fig6-decoherence-sine",
       {"scenario", "sine train with gamma = 1e8 /s, Gamma = 1e4 /s, peak Rabi = 70 THz",
        [](bool a) { return decoherence(sh08(0.0, a)); }}},
      {"fig6-decoherence-cosine",
       {"scenario", "cosine train with gamma = 1e8 /s, Gamma = 1e4 /s, peak Rabi = 70 THz",
        [kHalfPi](bool a) { return decoherence(sh08(kHalfPi, a)); }}},
      {"fig4-dressed-sine",
       {"scenario", "three-level dressed analysis, Ni08, single sine pulse, peak Rabi = 125.5 THz",
        [](bool a) { return dressed(0.0, a); }}},
      {"fig4-dressed-cosine",
       {"scenario", "three-level dressed analysis, Ni08, single cosine pulse, peak Rabi = 125.5 THz",
        [kHalfPi](bool a) { return dressed(kHalfPi, a); }}},
      {"fig2-spectrum-sine",
       {"scenario", "single-pulse field spectrum, phi = 0", [](bool a) { return spectrum(0.0, a); }}},
      {"fig2-spectrum-cosine",
       {"scenario", "single-pulse field spectrum, phi = pi/2",
        [kHalfPi](bool a) { return spectrum(kHalfPi, a); }}},
      {"weak-field-blocks",
       {"scenario", "single pulse, full model and five independent blocks at peak Rabi = 0.01 omega31",
        [](bool a) {
          ScenarioConfig cfg = sh08(0.0, a);
          cfg.mode = RunMode::Blocks;
          cfg.pulse.n_pulses = 1;
          cfg.peak_rabi = 0.01 * cfg.levels.omega31;
          return cfg;
        }}},
      {"zero-field",
       {"scenario", "fig3-text train with the field switched off", [](bool a) {
          ScenarioConfig cfg = sh08(0.0, a);
          cfg.peak_rabi = 0.0;
          return cfg;
        }}},
  };
  return presets;
}

}  // namespace

ScenarioConfig preset_config(const std::string& name, bool frequencies_are_angular) {
  const auto& presets = registry();
  const auto it = presets.find(name);
  if (it == presets.end()) throw UnknownPreset(name);
  ScenarioConfig cfg = it->second.build(frequencies_are_angular);
  cfg.name = name;
  cfg.source = "preset:" + name;
  cfg.output_dir = "out/" + name;
  return cfg;
}

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& [name, entry] : registry()) out.push_back({name, entry.kind, entry.description});
  return out;
}

}  // namespace combraman
