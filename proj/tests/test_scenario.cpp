#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "combraman/config.hpp"
#include "combraman/errors.hpp"
#include "combraman/scenario.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace combraman;

namespace {

ScenarioConfig short_train(const std::string& preset = "fig3-text", int pulses = 2) {
  auto c = preset_config(preset);
  c.pulse.n_pulses = pulses;
  return c;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("zero field leaves the initial state untouched") {
  const auto r = run_scenario(preset_config("zero-field"));
  REQUIRE(r.trajectory);
  const auto& tr = *r.trajectory;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr.populations[0][i] == 1.0);
    CHECK(tr.populations.back()[i] == 0.0);
  }
  CHECK(r.passed());
  CHECK(r.metric("final_pop_1").value() == 1.0);
}

TEST_CASE("train runs are deterministic") {
  const auto cfg = short_train();
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  CHECK(trajectory_csv(*a.trajectory, cfg.levels.n_excited) == trajectory_csv(*b.trajectory, cfg.levels.n_excited));
}

TEST_CASE("train metrics and checks") {
  const auto r = run_scenario(short_train());
  CHECK(r.passed());
  for (const char* name : {"trace", "hermiticity", "population_bounds"}) {
    CAPTURE(name);
    CHECK(std::any_of(r.checks.begin(), r.checks.end(), [&](const CheckResult& c) { return c.name == name; }));
  }
  double total = r.metric("final_pop_1").value() + r.metric("final_pop_3").value();
  for (int q = 1; q <= 5; ++q) total += r.metric("final_pop_2_" + std::to_string(q)).value();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.metric("windows").value() >= 1.0);
  CHECK_FALSE(r.metric("no_such_metric"));
}

TEST_CASE("CSV headers") {
  const auto cfg = short_train("fig3-text", 1);
  const auto r = run_scenario(cfg);
  CHECK(first_line(trajectory_csv(*r.trajectory, 5)) ==
        "t_fs,pop_1,pop_2_1,pop_2_2,pop_2_3,pop_2_4,pop_2_5,pop_3,abs_rho13,sum_abs_rho12,sum_abs_rho23");

  auto d = preset_config("fig4-dressed-sine");
  d.dressed_grid_points = 128;
  const auto dr = run_scenario(d);
  REQUIRE(dr.dressed);
  CHECK(first_line(dressed_csv(*dr.dressed)).rfind("t_fs,e1,e2,e3,ov_11,", 0) == 0);

  auto s = preset_config("fig2-spectrum-cosine");
  s.spectrum_points = 64;
  const auto sr = run_scenario(s);
  CHECK(sr.spectrum.size() == 64);
  CHECK(first_line(spectrum_csv(sr.spectrum)) == "omega,re_E,im_E");
}

TEST_CASE("outputs are written with a parseable manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "combraman_test_outputs";
  std::filesystem::remove_all(dir);
  const auto r = run_scenario(short_train("fig3-text", 1));
  const auto files = write_outputs(r, dir);
  CHECK(std::filesystem::exists(dir / "trajectory.csv"));
  REQUIRE(std::filesystem::exists(dir / "manifest.json"));
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["version"] == version());
  CHECK(m["passed"] == true);
  CHECK(m["checks"].is_array());
  CHECK(m.contains("tolerances"));
  CHECK(m.contains("wall_seconds"));
  CHECK(m["config"]["pulse"]["n_pulses"] == 1);
  CHECK(m["outputs"] == nlohmann::json::array({"trajectory.csv"}));
  CHECK(files.size() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("check_config passes on the shipped presets") {
  for (const char* name : {"fig3-text", "fig5-cosine", "fig6-decoherence-sine", "weak-field-blocks"}) {
    CAPTURE(name);
    const auto r = check_config(preset_config(name));
    CHECK(r.passed());
    CHECK(r.checks.size() >= 3);
  }
}

TEST_CASE("five-block mode") {
  const auto r = run_scenario(preset_config("weak-field-blocks"));
  REQUIRE(r.blocks);
  CHECK(r.blocks->blocks.size() == 5);
  CHECK(r.metric("blocks_relative_difference").value() <= 0.05);
}

TEST_CASE("a one-point sweep matches a direct run") {
  auto cfg = short_train("fig3-text", 1);
  cfg.sweep = {{"pulse.phi_rad", 0.0, 0.0, 1}};
  const auto sweep = run_sweep(cfg, 1);
  REQUIRE(sweep.rows.size() == 1);
  auto direct_cfg = cfg;
  direct_cfg.sweep.clear();
  const auto direct = run_scenario(direct_cfg);
  const auto& row = sweep.rows[0];
  REQUIRE(row.error.empty());
  CHECK(row.final_populations.front() == direct.metric("final_pop_1").value());
  CHECK(row.final_populations.back() == direct.metric("final_pop_3").value());
}

TEST_CASE("sweep results do not depend on the thread count") {
  auto cfg = short_train("fig3-text", 1);
  cfg.sweep = {{"pulse.phi_rad", 0.0, std::numbers::pi / 2, 3}, {"pulse.mod_amplitude", 2.0, 4.0, 2}};
  const auto one = run_sweep(cfg, 1);
  const auto four = run_sweep(cfg, 4);
  CHECK(one.rows.size() == 6);
  CHECK(sweep_csv(one) == sweep_csv(four));
  CHECK(one.rows[1].parameters == std::vector<double>{0.0, 4.0});
  CHECK(one.rows[2].parameters[0] == doctest::Approx(std::numbers::pi / 4));
  CHECK(one.all_ok());
}

TEST_CASE("sweep errors are recorded per point") {
  auto cfg = short_train("fig3-text", 1);
  cfg.sweep = {{"pulse.mod_time_fs", -1.0, 1.0, 3}};
  const auto s = run_sweep(cfg, 2);
  REQUIRE(s.rows.size() == 3);
  CHECK_FALSE(s.rows[0].error.empty());
  CHECK(s.rows[0].final_populations.empty());
  CHECK(s.rows[2].error.empty());
  CHECK_FALSE(s.all_ok());
  CHECK(sweep_csv(s).find("nan") != std::string::npos);
}

TEST_CASE("sweeps need a train-like mode and an axis") {
  auto cfg = preset_config("fig4-dressed-sine");
  cfg.sweep = {{"pulse.phi_rad", 0.0, 1.0, 2}};
  CHECK_THROWS_AS(run_sweep(cfg), ValidationError);
  CHECK_THROWS_AS(run_sweep(short_train()), ValidationError);
}
