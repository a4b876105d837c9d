#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "sweeper/commands.hpp"

using namespace sweeper;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const std::string& extra = "") {
  RunConfig cfg = parse_config(
      "ensemble.n_per_slit = 100\n"
      "ensemble.record_stride = 400\n"
      "screen.points = 401\n" +
      extra);
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sweeper_test_commands_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("oracle deviation separates the full current from a truncated one") {
  const RunConfig cfg = small_config();
  for (double a : {1.0, 1e-4, 1e-8}) {
    const OracleDeviation d = oracle_deviation(cfg.field(a), 32.0);
    CHECK(d.density <= 1e-10);
    CHECK(d.current <= 1e-10);
  }
  const RunConfig broken = small_config("debug.zero_sin_term = true");
  CHECK(oracle_deviation(broken.field(1e-8), 32.0).current > 1e-8);
  CHECK(oracle_deviation(broken.field(1e-8), 32.0).density <= 1e-10);
}

TEST_CASE("continuity sampling") {
  const SuperposedField f = small_config().field(1e-4);
  const auto pts = continuity_points(f, 32.0, 20, 9);
  const auto again = continuity_points(f, 32.0, 20, 9);
  REQUIRE(pts.size() == 20);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].x == again[i].x);
    CHECK(pts[i].t >= 0.5);
    CHECK(pts[i].t <= 32.0);
    CHECK(std::abs(continuity_ratio(f, pts[i].x, pts[i].t) - 4.0) <= 0.5);
  }
  CHECK(continuity_points(f, 32.0, 20, 10)[0].x != pts[0].x);
}

TEST_CASE("midline drift") {
  const RunConfig cfg = small_config();
  CHECK(midline_drift(cfg.field(1.0), cfg.ensemble) == 0.0);
  const RunConfig fixed = small_config("coherence.mode = decoherent_fixed");
  CHECK(midline_drift(fixed.field(1.0), fixed.ensemble) > 1e-3);
}

TEST_CASE("measured visibility follows the attenuation laws") {
  const RunConfig cfg = small_config();
  for (double a : {1e-1, 1e-3}) {
    CHECK(measured_visibility(cfg, a, AttenuationMode::Stochastic) ==
          doctest::Approx(2.0 * std::sqrt(a) / (1.0 + a)).epsilon(0.01));
    CHECK(measured_visibility(cfg, a, AttenuationMode::Chopper) ==
          doctest::Approx(2.0 * a / (1.0 + a)).epsilon(0.01));
  }
  CHECK(std::isnan(measured_visibility(cfg, 0.0, AttenuationMode::Stochastic)));
  const RunConfig dec = small_config("coherence.mode = decoherent_averaged");
  CHECK(std::isnan(measured_visibility(dec, 1e-2, AttenuationMode::Stochastic)));
}

TEST_CASE("sweep rows") {
  SUBCASE("fully open slit") {
    const SweepResult s = compute_sweep(small_config("sweep.a_list = 1"), 1);
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0].duality.distinguishability == 0.0);
    CHECK(s.rows[0].duality.visibility == 1.0);
    CHECK(s.rows[0].locus == 0.0);
  }
  SUBCASE("log-spaced transmission gives a monotone visibility column") {
    const SweepResult s = compute_sweep(small_config("sweep.a_list = 1e-10, 1e-7, 1e-4, 1e-1, 1\nsweep.onset_ratio = 0.3"), 1);
    REQUIRE(s.rows.size() == 5);
    for (std::size_t i = 1; i < s.rows.size(); ++i) {
      CHECK(s.rows[i].duality.visibility > s.rows[i - 1].duality.visibility);
      CHECK(s.rows[i].measured_visibility > s.rows[i - 1].measured_visibility);
    }
    CHECK(s.rows[0].bunching_ratio < 0.3);
    REQUIRE(s.onset.has_value());
    CHECK(*s.onset <= 1e-4);
  }
}

TEST_CASE("verify report") {
  SUBCASE("canonical coherent run passes") {
    const VerifyReport r = run_verify(small_config("attenuation.a = 1, 1e-8"), 1);
    CHECK(r.passed());
    bool saw_midline = false;
    for (const CheckResult& c : r.checks) saw_midline = saw_midline || c.name == "midline";
    CHECK(saw_midline);
  }
  SUBCASE("zeroed sin term fails a named check") {
    const VerifyReport r = run_verify(small_config("attenuation.a = 1e-8\ndebug.zero_sin_term = true"), 1);
    REQUIRE_FALSE(r.passed());
    CHECK(r.first_failure()->name == "oracle_current");
  }
  SUBCASE("decoherent continuity is informational") {
    const VerifyReport r = run_verify(small_config("attenuation.a = 1e-2\ncoherence.mode = decoherent_fixed"), 1);
    CHECK(r.passed());
    for (const CheckResult& c : r.checks) {
      if (c.name == "continuity" || c.name.rfind("oracle_", 0) == 0)
        CHECK(c.status == CheckStatus::Informational);
    }
  }
}

TEST_CASE("trajectory command writes tables and summaries") {
  const fs::path dir = scratch("traj");
  RunConfig cfg = small_config("attenuation.a = 1e-4");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(cmd_trajectories(cfg, 1, log) == kExitOk);
  const std::string table = slurp(dir / "trajectories_a1e-04.csv");
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "# " + std::string(kToolVersion) + " config=" + cfg.hash_hex());
  std::getline(lines, line);
  CHECK(line == "id,origin_slit,t,x,y");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 200 * 9);  // steps 0, 400, ..., 3200

  const auto summary = nlohmann::json::parse(slurp(dir / "trajectories_a1e-04_summary.json"));
  CHECK(summary["config_hash"] == cfg.hash_hex());
  CHECK(summary["ordering"]["preserved"] == true);
  CHECK(summary["bunching"]["ratio"].get<double>() < 1.0);
  fs::remove_all(dir);
}

TEST_CASE("screen command panels") {
  const fs::path dir = scratch("screen");
  SUBCASE("forward stochastic") {
    RunConfig cfg = small_config("attenuation.a = 0, 1e-4");
    cfg.output_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_screen(cfg, 1, log) == kExitOk);
    for (const char* stem : {"linear", "zoom", "initial", "log"}) {
      CHECK(fs::exists(dir / ("screen_a0_" + std::string(stem) + ".csv")));
      CHECK(fs::exists(dir / ("screen_a1e-04_" + std::string(stem) + ".csv")));
    }
    const std::string log_csv = slurp(dir / "screen_a1e-04_log.csv");
    CHECK(log_csv.find("coordinate,log10_intensity,clamped,log10_initial,initial_clamped") != std::string::npos);
  }
  SUBCASE("chopper in json") {
    RunConfig cfg = small_config("attenuation.a = 1e-2\nscreen.attenuation_mode = chopper\noutput.format = json");
    cfg.output_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_screen(cfg, 1, log) == kExitOk);
    const auto doc = nlohmann::json::parse(slurp(dir / "screen_a0.01_linear.json"));
    CHECK(doc["columns"] == nlohmann::json({"coordinate", "intensity"}));
    CHECK(doc["rows"].size() == 401);
    const SuperposedField one = cfg.field(0.0), both = cfg.field(1.0);
    const double x = doc["rows"][200][0].get<double>();
    const double expect = 0.99 * total_density(one, x, 32.0) + 0.01 * total_density(both, x, 32.0);
    CHECK(doc["rows"][200][1].get<double>() == doctest::Approx(expect).epsilon(1e-14));
  }
  SUBCASE("orthogonal") {
    RunConfig cfg = small_config(
        "attenuation.a = 1e-10\nscreen.orientation = orthogonal\nscreen.distance = 400\n"
        "ensemble.t_end = 150\nensemble.dt = 0.02\nscreen.grid_min = 0\nscreen.grid_max = 30");
    cfg.screen.points = 31;
    cfg.output_dir = dir.string();
    std::ostringstream log;
    CHECK(cmd_screen(cfg, 1, log) == kExitOk);
    const auto band = nlohmann::json::parse(slurp(dir / "screen_a1e-10_orthogonal_band.json"));
    CHECK(band["bands"]["slit2"]["count"] == 100);
    CHECK(band["bands"]["slit2"]["median_angle_deg"].get<double>() > 80.0);
    CHECK(fs::exists(dir / "screen_a1e-10_orthogonal_arrivals.csv"));
  }
  fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte-identical and thread-count independent") {
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  RunConfig cfg = small_config("attenuation.a = 1e-4\nensemble.seeding = density_weighted\nensemble.seed = 5");
  std::ostringstream log;
  cfg.output_dir = a.string();
  cmd_trajectories(cfg, 1, log);
  cmd_screen(cfg, 1, log);
  cfg.output_dir = b.string();
  cmd_trajectories(cfg, 3, log);
  cmd_screen(cfg, 3, log);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    ++compared;
  }
  CHECK(compared == 6);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("verify command exit codes and report") {
  const fs::path dir = scratch("verify");
  RunConfig cfg = small_config("attenuation.a = 1e-8\ndebug.zero_sin_term = true");
  cfg.output_dir = dir.string();
  std::ostringstream log;
  CHECK(cmd_verify(cfg, 1, log) == kExitVerifyFailed);
  const auto doc = nlohmann::json::parse(slurp(dir / "verify.json"));
  CHECK(doc["passed"] == false);
  CHECK(doc["failed_check"] == "oracle_current");
  CHECK(log.str().find("verify failed: oracle_current") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("unwritable output raises IoError") {
  const fs::path dir = scratch("io");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  RunConfig cfg = small_config("sweep.a_list = 1");
  cfg.output_dir = (dir / "file" / "sub").string();
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_sweep(cfg, 1, log), IoError);
  fs::remove_all(dir);
}
