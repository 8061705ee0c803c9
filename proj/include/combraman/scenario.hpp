#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "combraman/config.hpp"
#include "combraman/dressed.hpp"
#include "combraman/liouville.hpp"

namespace combraman {

/// One named pass/fail check recorded in a manifest.
struct CheckResult {
  std::string name;
  bool passed = true;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct RunResult {
  ScenarioConfig config;
  std::optional<Trajectory> trajectory;  // train and blocks modes
  std::optional<BlockRun> blocks;
  std::optional<DressedTrace> dressed;
  std::vector<SpectralSample> spectrum;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  bool passed() const;
  std::optional<double> metric(const std::string& name) const;
};

/// Dispatches on cfg.mode. Does not touch the filesystem.
RunResult run_scenario(const ScenarioConfig& cfg);

/// Invariant suite on a config without a full run: Hamiltonian Hermiticity
/// inside the active windows, trace and Hermiticity of the relaxation term,
/// one closed-form gap step and one short window step.
RunResult check_config(const ScenarioConfig& cfg);

std::string trajectory_csv(const Trajectory& trajectory, int n_excited);
std::string dressed_csv(const DressedTrace& trace);
std::string spectrum_csv(const std::vector<SpectralSample>& spectrum);
/// Manifest JSON: resolved parameters, version, tolerances, wall time,
/// checks, metrics and the output files.
std::string manifest_json(const RunResult& result, const std::vector<std::string>& outputs);

/// Writes the CSV(s) and manifest.json into dir (created if missing);
/// returns the written paths. Throws Error with the path on I/O failure.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::filesystem::path& dir);

struct SweepRow {
  std::vector<double> parameters;
  std::vector<double> final_populations;  // empty on error
  double max_excited_population = 0.0;
  bool invariants_passed = true;
  std::string error;
};

struct SweepResult {
  ScenarioConfig config;
  std::vector<std::string> keys;
  std::vector<SweepRow> rows;  // first axis outer, second inner
  double wall_seconds = 0.0;

  bool all_ok() const;
};

/// Runs every grid point of cfg.sweep independently on up to `threads`
/// workers. Per-point failures are recorded in the row.
SweepResult run_sweep(const ScenarioConfig& cfg, int threads = 1);

std::string sweep_csv(const SweepResult& sweep);
std::vector<std::filesystem::path> write_sweep(const SweepResult& sweep, const std::filesystem::path& dir);

std::string version();

}  // namespace combraman
