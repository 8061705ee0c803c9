// combraman command line: run, sweep, check and list-presets.
//
// Exit codes: 0 success, 1 invariant failure, 2 config error, 3 runtime error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "combraman/config.hpp"
#include "combraman/errors.hpp"
#include "combraman/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvariantFailure = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Source {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;
  std::string out;

  combraman::ScenarioConfig resolve() const {
    std::optional<std::filesystem::path> path;
    std::optional<std::string> name;
    if (!config.empty()) path = config;
    if (!preset.empty()) name = preset;
    auto cfg = combraman::resolve_config(path, name, overrides);
    if (!out.empty()) cfg.output_dir = out;
    return cfg;
  }
};

void add_source_options(CLI::App* cmd, Source& src) {
  auto* c = cmd->add_option("--config", src.config, "scenario file")->check(CLI::ExistingFile);
  auto* p = cmd->add_option("--preset", src.preset, "named scenario preset");
  c->excludes(p);
  cmd->add_option("--set", src.overrides, "override, e.g. --set pulse.phi_rad=1.5707963267948966")
      ->allow_extra_args(false);
  cmd->add_option("--out", src.out, "output directory");
}

void print_checks(const combraman::RunResult& r) {
  for (const auto& c : r.checks) {
    std::printf("  %-24s %s  value=%s  tol=%s\n", c.name.c_str(), c.passed ? "ok  " : "FAIL",
                combraman::format_double(c.value).c_str(), combraman::format_double(c.tolerance).c_str());
  }
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
}

int cmd_run(const Source& src) {
  const auto cfg = src.resolve();
  const auto result = combraman::run_scenario(cfg);
  const auto files = combraman::write_outputs(result, cfg.output_dir);
  std::printf("%s (%s) finished in %.2f s\n", cfg.name.c_str(), combraman::to_string(cfg.mode).c_str(),
              result.wall_seconds);
  print_checks(result);
  for (const auto& [k, v] : result.metrics) std::printf("  %-30s %s\n", k.c_str(), combraman::format_double(v).c_str());
  for (const auto& f : files) std::printf("  wrote %s\n", f.string().c_str());
  return result.passed() ? kOk : kInvariantFailure;
}

int cmd_sweep(const Source& src, int threads) {
  const auto cfg = src.resolve();
  const auto sweep = combraman::run_sweep(cfg, threads);
  const auto files = combraman::write_sweep(sweep, cfg.output_dir);
  std::size_t failed = 0;
  for (const auto& row : sweep.rows) failed += row.error.empty() && row.invariants_passed ? 0 : 1;
  std::printf("%s: %zu points, %zu failed, %.2f s\n", cfg.name.c_str(), sweep.rows.size(), failed,
              sweep.wall_seconds);
  for (const auto& f : files) std::printf("  wrote %s\n", f.string().c_str());
  return sweep.all_ok() ? kOk : kInvariantFailure;
}

int cmd_check(const Source& src) {
  const auto cfg = src.resolve();
  const auto result = combraman::check_config(cfg);
  std::printf("%s: configuration valid\n", cfg.name.c_str());
  print_checks(result);
  return result.passed() ? kOk : kInvariantFailure;
}

int cmd_list() {
  for (const auto& p : combraman::list_presets()) {
    std::printf("%-26s %-9s %s\n", p.name.c_str(), p.kind.c_str(), p.description.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Density-matrix simulation of comb-driven Raman transfer"};
  app.set_version_flag("--version", combraman::version());
  bool list_flag = false;
  app.add_flag("--list-presets", list_flag, "same as the list-presets subcommand");

  Source run_src;
  Source sweep_src;
  Source check_src;
  int threads = 1;

  auto* run = app.add_subcommand("run", "run one scenario and write CSV + manifest");
  add_source_options(run, run_src);
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_source_options(sweep, sweep_src);
  sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  auto* check = app.add_subcommand("check", "invariant suite on a config without a full run");
  add_source_options(check, check_src);
  auto* list = app.add_subcommand("list-presets", "list named presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (list_flag || *list) return cmd_list();
    if (*run) return cmd_run(run_src);
    if (*sweep) return cmd_sweep(sweep_src, threads);
    if (*check) return cmd_check(check_src);
    std::cerr << app.help();
    return kConfigError;
  } catch (const combraman::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const combraman::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const combraman::UnknownPreset& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
