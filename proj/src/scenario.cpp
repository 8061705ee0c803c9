#include "combraman/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "combraman/errors.hpp"
#include "json.hpp"

#ifndef COMBRAMAN_VERSION
#define COMBRAMAN_VERSION "unknown"
#endif

namespace combraman {
namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void collect_warnings(const ScenarioConfig& cfg, std::vector<std::string>& out) {
  for (auto& w : cfg.levels.warnings()) out.push_back(w);
  for (auto& w : cfg.pulse.warnings()) out.push_back(w);
}

void add_invariant_checks(const InvariantReport& inv, std::vector<CheckResult>& checks) {
  checks.push_back({"trace", inv.max_trace_error <= InvariantReport::kTraceTolerance, inv.max_trace_error,
                    InvariantReport::kTraceTolerance, "max |tr rho - 1| over samples"});
  checks.push_back({"hermiticity", inv.max_hermiticity_error <= InvariantReport::kHermiticityTolerance,
                    inv.max_hermiticity_error, InvariantReport::kHermiticityTolerance,
                    "max |rho - rho^dagger| over samples"});
  const double below = std::max(0.0, -inv.min_population);
  const double above = std::max(0.0, inv.max_population - 1.0);
  const double excursion = std::max(below, above);
  checks.push_back({"population_bounds", excursion <= InvariantReport::kPopulationSlack, excursion,
                    InvariantReport::kPopulationSlack, "largest excursion of a population outside [0, 1]"});
}

std::optional<double> absolute_end(const RwaHamiltonian& h, const ScenarioConfig& cfg) {
  if (!cfg.total_time) return std::nullopt;
  const auto windows = propagation_windows(h, cfg.integrator);
  const double start = windows.empty() ? 0.0 : windows.front().start;
  return start + *cfg.total_time;
}

void add_train_metrics(const Trajectory& tr, RunResult& r) {
  const int levels = tr.n_levels();
  if (tr.size() > 0) {
    r.metrics.emplace_back("final_pop_1", tr.populations[0].back());
    for (int q = 1; q < levels - 1; ++q) {
      r.metrics.emplace_back("final_pop_2_" + std::to_string(q), tr.populations[q].back());
    }
    r.metrics.emplace_back("final_pop_3", tr.populations[levels - 1].back());
    r.metrics.emplace_back("final_abs_rho13", tr.abs_rho13.back());
  }
  r.metrics.emplace_back("max_excited_population", tr.max_excited_population());
  r.metrics.emplace_back("window_sparsity", tr.window_sparsity);
  r.metrics.emplace_back("samples", static_cast<double>(tr.size()));
  r.metrics.emplace_back("accepted_steps", static_cast<double>(tr.step_stats.accepted));
  r.metrics.emplace_back("rejected_steps", static_cast<double>(tr.step_stats.rejected));
  r.metrics.emplace_back("rhs_evaluations", static_cast<double>(tr.step_stats.rhs_evaluations));
  r.metrics.emplace_back("windows", static_cast<double>(tr.step_stats.windows));
  r.metrics.emplace_back("gaps", static_cast<double>(tr.step_stats.gaps));
}

void run_train_mode(RunResult& r) {
  const auto& cfg = r.config;
  const RwaHamiltonian h(cfg.levels, cfg.pulse, cfg.peak_rabi, cfg.bessel_threshold);
  const auto rho0 = DensityMatrix::pure(h.dim(), cfg.initial_level());
  Trajectory tr = run_train(rho0, h, cfg.rates, cfg.integrator, absolute_end(h, cfg));
  add_invariant_checks(tr.invariants, r.checks);
  add_train_metrics(tr, r);
  r.trajectory = std::move(tr);
}

void run_blocks_mode(RunResult& r) {
  run_train_mode(r);
  const auto& cfg = r.config;
  const RwaHamiltonian h(cfg.levels, cfg.pulse, cfg.peak_rabi, cfg.bessel_threshold);
  BlockRun blocks = run_blocks(h, cfg.rates, cfg.integrator, absolute_end(h, cfg));
  InvariantReport merged;
  for (const auto& b : blocks.blocks) merged.merge(b.invariants);
  CheckResult check{"block_invariants", merged.passed(), merged.max_trace_error,
                    InvariantReport::kTraceTolerance, "trace, Hermiticity and bounds over all blocks"};
  r.checks.push_back(check);
  const double full = r.trajectory->populations.back().back();
  const double superposed = blocks.superposed_final_population();
  r.metrics.emplace_back("blocks_superposed_final_pop_3", superposed);
  r.metrics.emplace_back("blocks_incoherent_final_pop_3", blocks.incoherent_final_population());
  r.metrics.emplace_back("blocks_relative_difference",
                         full != 0.0 ? std::abs(superposed - full) / std::abs(full) : std::abs(superposed));
  r.blocks = std::move(blocks);
}

void run_dressed_mode(RunResult& r) {
  const auto& cfg = r.config;
  const auto grid = dressed_grid(cfg.levels, cfg.pulse, cfg.dressed_grid_points, cfg.bessel_threshold);
  DressedTrace trace = eigen_traces(cfg.levels, cfg.pulse, cfg.peak_rabi, cfg.pulse.phi, grid);
  const DressedModel model(cfg.levels, cfg.pulse, cfg.peak_rabi, cfg.bessel_threshold);

  double worst = 0.0;
  double max_s = 0.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Matrix3 h = model.at(trace.times[i]);
    const double s = std::sqrt(std::norm(h(0, 1)) + std::norm(h(1, 2)));
    max_s = std::max(max_s, s);
    std::array<double, 3> e = trace.energies[i];
    std::sort(e.begin(), e.end());
    const double err = std::max({std::abs(e[0] + s), std::abs(e[1]), std::abs(e[2] - s)});
    worst = std::max(worst, s > 0.0 ? err / s : err);
  }
  r.checks.push_back({"dressed_eigenvalues", worst <= 1e-10, worst, 1e-10,
                      "max relative deviation of eigenvalues from {0, +-s}"});
  r.metrics.emplace_back("max_s", max_s);
  r.metrics.emplace_back("grid_points", static_cast<double>(trace.size()));
  r.metrics.emplace_back("tracking_refinements", trace.refinements);
  // Excited bare state |2> is index 1.
  for (int b = 0; b < 3; ++b) {
    r.metrics.emplace_back("max_excited_overlap_branch_" + std::to_string(b + 1), trace.max_overlap(1, b));
  }
  r.dressed = std::move(trace);
}

void run_spectrum_mode(RunResult& r) {
  const auto& p = r.config.pulse;
  const double half_width = 8.0 / p.tau;
  const int n = r.config.spectrum_points;
  r.spectrum.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double omega = p.omega0 - half_width + 2.0 * half_width * i / (n - 1);
    r.spectrum.push_back({omega, field_spectrum(omega, p)});
  }
  double peak = 0.0;
  for (const auto& s : r.spectrum) peak = std::max(peak, std::abs(s.value));
  r.metrics.emplace_back("max_abs_spectrum", peak);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

json config_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["source"] = c.source;
  j["mode"] = to_string(c.mode);
  j["frequencies_are_angular"] = c.frequencies_are_angular;
  j["levels"] = {{"omega21_rad_per_fs", c.levels.omega21},
                 {"omega32_rad_per_fs", c.levels.omega32},
                 {"omega31_rad_per_fs", c.levels.omega31},
                 {"delta_omega_rad_per_fs", c.levels.delta_omega},
                 {"n_excited", c.levels.n_excited}};
  j["pulse"] = {{"e0", c.pulse.e0},
                {"tau_fs", c.pulse.tau},
                {"period_fs", c.pulse.period},
                {"n_pulses", c.pulse.n_pulses},
                {"omega0_rad_per_fs", c.pulse.omega0},
                {"mod_amplitude", c.pulse.mod_amplitude},
                {"mod_time_fs", c.pulse.mod_time},
                {"phi_rad", c.pulse.phi},
                {"peak_rabi_rad_per_fs", c.peak_rabi},
                {"bessel_threshold", c.bessel_threshold}};
  j["rates"] = {{"gamma1_per_fs", c.rates.gamma1},         {"gamma2_per_fs", c.rates.gamma2},
                {"gamma3_per_fs", c.rates.gamma3},         {"dephasing1_per_fs", c.rates.dephasing1},
                {"dephasing2_per_fs", c.rates.dephasing2}, {"dephasing3_per_fs", c.rates.dephasing3}};
  j["integrator"] = {{"rel_tol", c.integrator.rel_tol},
                     {"abs_tol", c.integrator.abs_tol},
                     {"max_step_fs", c.integrator.max_step},
                     {"sample_stride", c.integrator.sample_stride},
                     {"window_padding_tau", c.integrator.window_padding},
                     {"max_samples", c.integrator.max_samples}};
  j["run"] = {{"initial_state", c.initial_state},
              {"total_time_fs", c.total_time ? json(*c.total_time) : json(nullptr)},
              {"dressed_grid_points", c.dressed_grid_points},
              {"spectrum_points", c.spectrum_points}};
  json sweep = json::array();
  for (const auto& a : c.sweep) sweep.push_back({{"param", a.key}, {"from", a.from}, {"to", a.to}, {"count", a.count}});
  j["sweep"] = sweep;
  return j;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void append_row(std::string& out, std::initializer_list<double> head, const std::vector<double>& tail) {
  bool first = true;
  auto put = [&](double v) {
    if (!first) out += ',';
    first = false;
    out += format_double(v);
  };
  for (double v : head) put(v);
  for (double v : tail) put(v);
  out += '\n';
}

}  // namespace

std::string version() { return COMBRAMAN_VERSION; }

bool RunResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::optional<double> RunResult::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  return std::nullopt;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  RunResult r;
  r.config = cfg;
  collect_warnings(cfg, r.warnings);
  switch (cfg.mode) {
    case RunMode::Train: run_train_mode(r); break;
    case RunMode::Blocks: run_blocks_mode(r); break;
    case RunMode::Dressed: run_dressed_mode(r); break;
    case RunMode::Spectrum: run_spectrum_mode(r); break;
  }
  r.wall_seconds = seconds_since(start);
  return r;
}

RunResult check_config(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto start = Clock::now();
  RunResult r;
  r.config = cfg;
  collect_warnings(cfg, r.warnings);

  const RwaHamiltonian h(cfg.levels, cfg.pulse, cfg.peak_rabi, cfg.bessel_threshold);
  const auto windows = propagation_windows(h, cfg.integrator);
  r.metrics.emplace_back("windows", static_cast<double>(windows.size()));
  r.metrics.emplace_back("window_sparsity", window_sparsity(h.active_windows(), cfg.pulse));

  std::mt19937_64 rng(20261016);
  double herm = 0.0;
  if (!windows.empty()) {
    std::uniform_real_distribution<double> pick(windows.front().start, windows.front().end);
    Matrix m(h.dim(), h.dim());
    for (int i = 0; i < 256; ++i) {
      h.evaluate(pick(rng), m);
      herm = std::max(herm, (m - m.adjoint()).cwiseAbs().maxCoeff());
    }
  }
  r.checks.push_back({"hamiltonian_hermiticity", herm <= 1e-12, herm, 1e-12, "max |H - H^dagger| in window 1"});

  // Random mixed state: rho = A A^dagger / tr.
  std::normal_distribution<double> gauss;
  Matrix a(h.dim(), h.dim());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) a(i, j) = cdouble(gauss(rng), gauss(rng));
  }
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  const Matrix drho = relaxation_rhs(rho, cfg.rates, h.index());
  const double scale = std::max({cfg.rates.gamma1, cfg.rates.gamma2, cfg.rates.gamma3, 1e-300});
  const double tr_rel = std::abs(drho.trace()) / scale;
  const double herm_rel = (drho - drho.adjoint()).cwiseAbs().maxCoeff() / scale;
  r.checks.push_back({"relaxation_trace", tr_rel <= 1e-12, tr_rel, 1e-12, "|tr L(rho)| / max rate"});
  r.checks.push_back({"relaxation_hermiticity", herm_rel <= 1e-12, herm_rel, 1e-12,
                      "max |L(rho) - L(rho)^dagger| / max rate"});

  InvariantReport inv;
  const auto gap = propagate_gap(DensityMatrix::unchecked(rho), cfg.rates, cfg.pulse.period);
  inv.record(gap.diagnostics());
  if (!windows.empty()) {
    const auto& w = windows.front();
    const double t1 = std::min(w.end, w.start + 4.0 * cfg.pulse.tau);
    const auto res = propagate_window(DensityMatrix::pure(h.dim(), cfg.initial_level()), h, cfg.rates, w.start,
                                      t1, cfg.integrator);
    inv.merge(res.samples.invariants);
    inv.record(res.state.diagnostics());
  }
  add_invariant_checks(inv, r.checks);
  r.wall_seconds = seconds_since(start);
  return r;
}

std::string trajectory_csv(const Trajectory& tr, int n_excited) {
  std::string out = "t_fs,pop_1";
  for (int q = 1; q <= n_excited; ++q) out += ",pop_2_" + std::to_string(q);
  out += ",pop_3,abs_rho13,sum_abs_rho12,sum_abs_rho23\n";
  std::vector<double> row(n_excited + 5);
  for (std::size_t s = 0; s < tr.size(); ++s) {
    for (int i = 0; i < n_excited + 2; ++i) row[i] = tr.populations[i][s];
    row[n_excited + 2] = tr.abs_rho13[s];
    row[n_excited + 3] = tr.sum_abs_rho12[s];
    row[n_excited + 4] = tr.sum_abs_rho23[s];
    append_row(out, {tr.times[s]}, row);
  }
  return out;
}

std::string dressed_csv(const DressedTrace& trace) {
  std::string out = "t_fs,e1,e2,e3";
  for (int b = 1; b <= 3; ++b) {
    for (int j = 1; j <= 3; ++j) out += ",ov_" + std::to_string(b) + std::to_string(j);
  }
  out += '\n';
  std::vector<double> row(12);
  for (std::size_t s = 0; s < trace.size(); ++s) {
    for (int j = 0; j < 3; ++j) row[j] = trace.energies[s][j];
    for (int b = 0; b < 3; ++b) {
      for (int j = 0; j < 3; ++j) row[3 + 3 * b + j] = trace.overlaps[s][b][j];
    }
    append_row(out, {trace.times[s]}, row);
  }
  return out;
}

std::string spectrum_csv(const std::vector<SpectralSample>& spectrum) {
  std::string out = "omega,re_E,im_E\n";
  for (const auto& s : spectrum) append_row(out, {s.omega, s.value.real(), s.value.imag()}, {});
  return out;
}

std::string manifest_json(const RunResult& r, const std::vector<std::string>& outputs) {
  json j;
  j["software"] = "combraman";
  j["version"] = version();
  j["timestamp_utc"] = utc_timestamp();
  j["wall_seconds"] = r.wall_seconds;
  j["config"] = config_json(r.config);
  j["tolerances"] = {{"rel_tol", r.config.integrator.rel_tol},
                     {"abs_tol", r.config.integrator.abs_tol},
                     {"trace", InvariantReport::kTraceTolerance},
                     {"hermiticity", InvariantReport::kHermiticityTolerance},
                     {"population_slack", InvariantReport::kPopulationSlack}};
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  j["checks"] = checks;
  j["passed"] = r.passed();
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  j["metrics"] = metrics;
  j["warnings"] = r.warnings;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& file, const std::string& text) {
    const auto path = dir / file;
    write_text(path, text);
    written.push_back(path);
  };
  if (r.trajectory) emit("trajectory.csv", trajectory_csv(*r.trajectory, r.config.levels.n_excited));
  if (r.blocks) {
    for (std::size_t q = 0; q < r.blocks->blocks.size(); ++q) {
      emit("block_" + std::to_string(q + 1) + ".csv", trajectory_csv(r.blocks->blocks[q], 1));
    }
  }
  if (r.dressed) emit("dressed.csv", dressed_csv(*r.dressed));
  if (!r.spectrum.empty()) emit("spectrum.csv", spectrum_csv(r.spectrum));

  std::vector<std::string> names;
  for (const auto& p : written) names.push_back(p.filename().string());
  emit("manifest.json", manifest_json(r, names));
  return written;
}

bool SweepResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const SweepRow& row) { return row.error.empty() && row.invariants_passed; });
}

SweepResult run_sweep(const ScenarioConfig& cfg, int threads) {
  cfg.validate();
  if (cfg.sweep.empty()) throw ValidationError("sweep", "no sweep block in config");
  if (cfg.mode != RunMode::Train && cfg.mode != RunMode::Blocks) {
    throw ValidationError("mode", "sweeps run in train or blocks mode");
  }
  const auto start = Clock::now();
  SweepResult result;
  result.config = cfg;

  std::vector<std::vector<double>> grid{{}};
  for (const auto& axis : cfg.sweep) {
    result.keys.push_back(axis.key);
    std::vector<std::vector<double>> next;
    for (const auto& prefix : grid) {
      for (double v : axis.values()) {
        auto point = prefix;
        point.push_back(v);
        next.push_back(std::move(point));
      }
    }
    grid = std::move(next);
  }
  result.rows.resize(grid.size());

  auto run_point = [&](std::size_t i) {
    SweepRow& row = result.rows[i];
    row.parameters = grid[i];
    try {
      ScenarioConfig point = cfg;
      point.sweep.clear();
      point.mode = RunMode::Train;
      for (std::size_t a = 0; a < result.keys.size(); ++a) {
        apply_setting(point, result.keys[a], format_double(grid[i][a]));
      }
      const RunResult r = run_scenario(point);
      const Trajectory& tr = *r.trajectory;
      for (int l = 0; l < tr.n_levels(); ++l) {
        row.final_populations.push_back(tr.size() ? tr.populations[l].back() : 0.0);
      }
      row.max_excited_population = tr.max_excited_population();
      row.invariants_passed = r.passed();
    } catch (const std::exception& e) {
      row.error = e.what();
      row.final_populations.clear();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) run_point(i);
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  result.wall_seconds = seconds_since(start);
  return result;
}

std::string sweep_csv(const SweepResult& sweep) {
  const int n_excited = sweep.config.levels.n_excited;
  std::string out;
  for (const auto& k : sweep.keys) out += k + ",";
  out += "pop_1";
  for (int q = 1; q <= n_excited; ++q) out += ",pop_2_" + std::to_string(q);
  out += ",pop_3,max_excited,invariants_ok,error\n";
  for (const auto& row : sweep.rows) {
    std::string line;
    for (double v : row.parameters) line += format_double(v) + ",";
    for (int l = 0; l < n_excited + 2; ++l) {
      if (l > 0) line += ',';
      line += row.final_populations.empty() ? "nan" : format_double(row.final_populations[l]);
    }
    line += "," + (row.error.empty() ? format_double(row.max_excited_population) : std::string("nan"));
    line += row.invariants_passed && row.error.empty() ? ",1" : ",0";
    std::string err = row.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    line += ",\"" + err + "\"\n";
    out += line;
  }
  return out;
}

std::vector<std::filesystem::path> write_sweep(const SweepResult& sweep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto table = dir / "sweep.csv";
  write_text(table, sweep_csv(sweep));

  json j;
  j["software"] = "combraman";
  j["version"] = version();
  j["timestamp_utc"] = utc_timestamp();
  j["wall_seconds"] = sweep.wall_seconds;
  j["config"] = config_json(sweep.config);
  j["points"] = sweep.rows.size();
  std::size_t failed = 0;
  for (const auto& row : sweep.rows) failed += row.error.empty() ? 0 : 1;
  j["failed_points"] = failed;
  j["passed"] = sweep.all_ok();
  j["outputs"] = {"sweep.csv"};
  const auto manifest = dir / "manifest.json";
  write_text(manifest, j.dump(2) + "\n");
  return {table, manifest};
}

}  // namespace combraman
