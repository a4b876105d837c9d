#include "sweeper/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <variant>

#include "json.hpp"
#include "sweeper/csv.hpp"
#include "sweeper/oracle.hpp"

namespace sweeper {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kOracleTolerance = 1e-10;
constexpr double kContinuityTarget = 4.0;
constexpr double kContinuityTolerance = 0.5;
constexpr double kDualityTolerance = 1e-12;
constexpr double kMidlineTolerance = 1e-12;
constexpr std::size_t kContinuityPoints = 20;
constexpr std::size_t kMinBunchingCount = 100;

using Cell = std::variant<long long, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string cell_text(const Cell& c) {
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return format_double(std::get<double>(c));
}

json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  const double v = std::get<double>(c);
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string a_tag(double a) { return "a" + format_double(a); }

class Writer {
 public:
  Writer(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log), dir_(cfg.output_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  // Writes `stem`.csv or `stem`.json according to the configured format.
  void table(const std::string& stem, const Table& t) {
    if (cfg_.format == OutputFormat::Json) {
      json rows = json::array();
      for (const auto& r : t.rows) {
        json row = json::array();
        for (const Cell& c : r) row.push_back(cell_json(c));
        rows.push_back(std::move(row));
      }
      document(stem, json{{"columns", t.columns}, {"rows", std::move(rows)}});
      return;
    }
    std::string text = "# " + std::string(kToolVersion) + " config=" + cfg_.hash_hex() + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) text += (i ? "," : "") + t.columns[i];
    text += "\n";
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) text += (i ? "," : "") + cell_text(r[i]);
      text += "\n";
    }
    emit(stem + ".csv", text);
  }

  // CSV produced elsewhere; the header comment is prepended here.
  void raw_csv(const std::string& stem, const std::string& body) {
    emit(stem + ".csv", "# " + std::string(kToolVersion) + " config=" + cfg_.hash_hex() + "\n" + body);
  }

  void document(const std::string& stem, json body) {
    json doc = {{"tool", kToolVersion}, {"config_hash", cfg_.hash_hex()}};
    doc.update(body);
    emit(stem + ".json", doc.dump(1) + "\n");
  }

 private:
  void emit(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw IoError("cannot write " + path.string());
    log_ << "wrote " << path.string() << "\n";
  }

  const RunConfig& cfg_;
  std::ostream& log_;
  std::filesystem::path dir_;
};

bool mirror_symmetric(const CoherenceMode& mode) {
  return mode.kind != CoherenceKind::DecoherentFixedPhase && mode.extra_phase == 0.0;
}

std::optional<BunchingReport> bunching_for(const EnsembleResult& r, const std::vector<double>& baseline) {
  const auto slit2 = endpoints(r, 2);
  if (slit2.size() < kMinBunchingCount || baseline.size() < kMinBunchingCount) return std::nullopt;
  return bunching_metrics(slit2, baseline);
}

json bunching_json(const std::optional<BunchingReport>& b) {
  if (!b) return nullptr;
  return {{"count", b->count},         {"iqr", b->iqr},
          {"peak_position", b->peak_position}, {"peak_fraction", b->peak_fraction},
          {"baseline_iqr", b->baseline_iqr},   {"ratio", b->ratio}};
}

ScreenProfile forward_profile(const RunConfig& cfg, double a, const std::vector<double>& grid,
                              int threads) {
  if (cfg.screen.attenuation_mode == AttenuationMode::Chopper) {
    return chopper_profile(cfg.field(0.0), cfg.field(1.0), a, cfg.screen.distance, grid, threads);
  }
  return stochastic_profile(cfg.field(a), cfg.screen.distance, grid, threads);
}

Table profile_table(const ScreenProfile& p) {
  Table t{{"coordinate", "intensity"}, {}};
  for (std::size_t i = 0; i < p.grid.size(); ++i) t.rows.push_back({p.grid[i], p.intensity[i]});
  return t;
}

}  // namespace

OracleDeviation oracle_deviation(const SuperposedField& f, double t_end, int nx, int nt) {
  double max_p = 0.0, max_j = 0.0, err_p = 0.0, err_j = 0.0;
  const double x_mid = 0.5 * (f.ch1.center + f.ch2.center);
  const double half = 0.5 * std::abs(f.ch2.center - f.ch1.center);
  for (int j = 0; j < nt; ++j) {
    const double t = 0.02 + (t_end - 0.02) * j / std::max(1, nt - 1);
    const double reach = half + 4.0 * std::max(dispersed_width(f.params, f.ch1, t),
                                               dispersed_width(f.params, f.ch2, t));
    for (int i = 0; i < nx; ++i) {
      const double x = x_mid - reach + 2.0 * reach * i / std::max(1, nx - 1);
      const auto psi = oracle::wave(f, x, t);
      const double pq = oracle::qm_density(psi);
      const double jq = oracle::qm_current(f.params, psi);
      max_p = std::max(max_p, pq);
      max_j = std::max(max_j, std::abs(jq));
      err_p = std::max(err_p, std::abs(total_density(f, x, t) - pq));
      err_j = std::max(err_j, std::abs(total_current(f, x, t).current - jq));
    }
  }
  return {max_p > 0.0 ? err_p / max_p : err_p, max_j > 0.0 ? err_j / max_j : err_j};
}

double continuity_ratio(const SuperposedField& f, double x, double t) {
  // Steps scale with the local width and the fastest channel velocity.
  const FieldSample s1 = sample_channel(f.params, f.ch1, x, t);
  const FieldSample s2 = sample_channel(f.params, f.ch2, x, t);
  const double width = std::min(dispersed_width(f.params, f.ch1, t), dispersed_width(f.params, f.ch2, t));
  const double speed = std::abs(s1.v) + std::abs(s2.v) + std::abs(s1.u) + std::abs(s2.u);
  const double h_x = 1e-3 * width;
  const double h_t = std::min(1e-3 * width / std::max(speed, 1e-300), 0.25 * t);
  return oracle::continuity_residual(f, x, t, h_x, h_t) /
         oracle::continuity_residual(f, x, t, 0.5 * h_x, 0.5 * h_t);
}

std::vector<SamplePoint> continuity_points(const SuperposedField& f, double t_end, std::size_t n,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const double lo_c = std::min(f.ch1.center, f.ch2.center);
  const double hi_c = std::max(f.ch1.center, f.ch2.center);
  std::vector<SamplePoint> out;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t_end / 64.0 + (t_end - t_end / 64.0) * uniform();
    const double w = std::max(dispersed_width(f.params, f.ch1, t), dispersed_width(f.params, f.ch2, t));
    out.push_back({lo_c - 3.0 * w + (hi_c - lo_c + 6.0 * w) * uniform(), t});
  }
  return out;
}

double midline_drift(const SuperposedField& f, const EnsembleSpec& spec) {
  const double mid = 0.5 * (f.ch1.center + f.ch2.center);
  double drift = 0.0;
  integrate_path(f, mid, spec.t_end, spec.dt, [&](double, double, double t, double x) {
    drift = std::max(drift, std::abs(x - mid) / t);
    return true;
  });
  return drift;
}

std::vector<double> baseline_endpoints(const RunConfig& cfg, int threads) {
  const SuperposedField f = cfg.field(0.0);
  SuperposedField lone = SuperposedField::single(f.params, f.ch2);
  lone.density_floor = cfg.density_floor;
  return endpoints(run_ensemble(lone, cfg.ensemble, threads), 1);
}

double measured_visibility(const RunConfig& cfg, double a, AttenuationMode mode, int threads) {
  const double L = cfg.screen.visibility_distance;
  const SuperposedField open = cfg.field(1.0);
  const double period = fringe_period(open, screen_time(open.params, L));
  const double mid = 0.5 * (open.ch1.center + open.ch2.center);
  const double half = cfg.screen.visibility_periods * period;
  // ~400 samples per fringe.
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * cfg.screen.visibility_periods * 400.0)) + 1;
  const auto grid = linspace(mid - half, mid + half, n);
  const ScreenProfile prof = mode == AttenuationMode::Chopper
                                 ? chopper_profile(cfg.field(0.0), open, a, L, grid, threads)
                                 : stochastic_profile(cfg.field(a), L, grid, threads);
  try {
    return fringe_visibility(prof, grid.front(), grid.back());
  } catch (const NoFringesDetected&) {
    return kNaN;
  }
}

SweepResult compute_sweep(const RunConfig& cfg, int threads) {
  const auto& a_list = cfg.sweep.a_list.empty() ? cfg.attenuation : cfg.sweep.a_list;
  const auto baseline = baseline_endpoints(cfg, threads);
  SweepResult result;
  for (double a : a_list) {
    SweepRow row;
    row.a = a;
    row.duality = duality_metrics(a);
    row.measured_visibility = measured_visibility(cfg, a, cfg.screen.attenuation_mode, threads);
    const SuperposedField f = cfg.field(a);
    row.locus = no_crossing_locus(f, cfg.ensemble.t_end);
    row.bunching_ratio = kNaN;
    if (a > 0.0) {
      const auto b = bunching_for(run_ensemble(f, cfg.ensemble, threads), baseline);
      if (b) row.bunching_ratio = b->ratio;
    }
    if (row.bunching_ratio <= cfg.sweep.onset_ratio && (!result.onset || a > *result.onset)) result.onset = a;
    result.rows.push_back(row);
  }
  return result;
}

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Informational: return "informational";
  }
  return "fail";
}

bool VerifyReport::passed() const { return first_failure() == nullptr; }

const CheckResult* VerifyReport::first_failure() const {
  for (const CheckResult& c : checks)
    if (c.status == CheckStatus::Fail) return &c;
  return nullptr;
}

VerifyReport run_verify(const RunConfig& cfg, int threads) {
  VerifyReport report;
  // The wave-function oracle describes the coherent superposition only.
  const bool coherent = cfg.coherence.kind == CoherenceKind::Coherent;
  auto status = [&](bool ok, bool binding) {
    if (!binding) return CheckStatus::Informational;
    return ok ? CheckStatus::Pass : CheckStatus::Fail;
  };

  for (double a : cfg.attenuation) {
    const SuperposedField f = cfg.field(a);
    const std::string at = " at a=" + format_double(a);

    const OracleDeviation dev = oracle_deviation(f, cfg.ensemble.t_end);
    report.checks.push_back({"oracle_density", status(dev.density <= kOracleTolerance, coherent), dev.density,
                             kOracleTolerance, "max |P - |psi|^2| / max |psi|^2" + at});
    report.checks.push_back({"oracle_current", status(dev.current <= kOracleTolerance, coherent), dev.current,
                             kOracleTolerance, "max |J - J_psi| / max |J_psi|" + at});

    double worst = kContinuityTarget;
    for (const SamplePoint& p : continuity_points(f, cfg.ensemble.t_end, kContinuityPoints, cfg.ensemble.seed)) {
      const double r = continuity_ratio(f, p.x, p.t);
      if (!(std::abs(r - kContinuityTarget) <= std::abs(worst - kContinuityTarget))) worst = r;
    }
    report.checks.push_back({"continuity",
                             status(std::abs(worst - kContinuityTarget) <= kContinuityTolerance, coherent),
                             worst, kContinuityTarget, "residual halving ratio farthest from 4" + at});

    const DualityMetrics d = duality_metrics(a);
    report.checks.push_back({"duality", status(std::abs(d.residual) <= kDualityTolerance, true),
                             std::abs(d.residual), kDualityTolerance, "|D^2 + V^2 - 1|" + at});

    const EnsembleResult r = run_ensemble(f, cfg.ensemble, threads);
    report.checks.push_back({"ordering", status(r.ordering.preserved && r.escaped == 0, true),
                             static_cast<double>(r.ordering.violations), 0.0,
                             "neighbour order swaps (escaped " + std::to_string(r.escaped) + ")" + at});

    if (a == 1.0 && mirror_symmetric(cfg.coherence)) {
      const double drift = midline_drift(f, cfg.ensemble);
      report.checks.push_back({"midline", status(drift <= kMidlineTolerance, true), drift, kMidlineTolerance,
                               "max |x - x_mid| / t on the symmetry line" + at});
    }
  }
  return report;
}

int cmd_trajectories(const RunConfig& cfg, int threads, std::ostream& log) {
  Writer out(cfg, log);
  const auto baseline = baseline_endpoints(cfg, threads);
  for (double a : cfg.attenuation) {
    const EnsembleResult r = run_ensemble(cfg.field(a), cfg.ensemble, threads);
    Table t{{"id", "origin_slit", "t", "x", "y"}, {}};
    json flags = json::array();
    for (std::size_t id = 0; id < r.trajectories.size(); ++id) {
      const Trajectory& tr = r.trajectories[id];
      for (std::size_t k = 0; k < tr.times.size(); ++k)
        t.rows.push_back({static_cast<long long>(id), static_cast<long long>(tr.origin_slit), tr.times[k],
                          tr.x[k], tr.y[k]});
      if (tr.escaped || tr.underflow_steps > 0)
        flags.push_back({{"id", id},
                         {"escaped", tr.escaped},
                         {"escape_time", tr.escape_time},
                         {"underflow_steps", tr.underflow_steps}});
    }
    const std::string stem = "trajectories_" + a_tag(a);
    out.table(stem, t);
    out.document(stem + "_summary",
                 {{"a", a},
                  {"coherence", to_string(cfg.coherence.kind)},
                  {"trajectories", r.trajectories.size()},
                  {"ordering",
                   {{"preserved", r.ordering.preserved},
                    {"violations", r.ordering.violations},
                    {"first_violation_step", r.ordering.first_violation_step}}},
                  {"escaped", r.escaped},
                  {"flags", flags},
                  {"locus", no_crossing_locus(cfg.field(a), cfg.ensemble.t_end)},
                  {"bunching", bunching_json(a > 0.0 ? bunching_for(r, baseline) : std::nullopt)}});
  }
  return kExitOk;
}

int cmd_screen(const RunConfig& cfg, int threads, std::ostream& log) {
  Writer out(cfg, log);
  const auto grid = linspace(cfg.screen.grid_min, cfg.screen.grid_max, cfg.screen.points);

  if (cfg.screen.orientation == Orientation::Orthogonal) {
    for (double a : cfg.attenuation) {
      const auto arrivals =
          orthogonal_arrivals(cfg.field(a), cfg.ensemble, cfg.screen.distance, cfg.ensemble.t_end, threads);
      const std::string stem = "screen_" + a_tag(a) + "_orthogonal";
      Table hits{{"id", "origin_slit", "t", "y", "angle_deg"}, {}};
      for (std::size_t i = 0; i < arrivals.size(); ++i)
        hits.rows.push_back({static_cast<long long>(i), static_cast<long long>(arrivals[i].origin_slit),
                             arrivals[i].t, arrivals[i].y, arrivals[i].angle_deg});
      out.table(stem + "_arrivals", hits);

      const ScreenProfile all = orthogonal_profile(arrivals, cfg.screen.distance, grid);
      const ScreenProfile s1 = orthogonal_profile(arrivals, cfg.screen.distance, grid, 1);
      const ScreenProfile s2 = orthogonal_profile(arrivals, cfg.screen.distance, grid, 2);
      Table t{{"coordinate", "density", "density_slit1", "density_slit2"}, {}};
      for (std::size_t i = 0; i < all.grid.size(); ++i)
        t.rows.push_back({all.grid[i], all.intensity[i], s1.intensity[i], s2.intensity[i]});
      out.table(stem, t);

      json bands = json::object();
      for (int slit : {1, 2}) {
        const ArrivalBand b = arrival_band(arrivals, slit);
        bands["slit" + std::to_string(slit)] = {{"count", b.count},
                                                {"median_angle_deg", number(b.median_angle_deg)},
                                                {"width_deg", number(b.width_deg)}};
      }
      out.document(stem + "_band", {{"a", a}, {"x_screen", cfg.screen.distance}, {"bands", bands}});
    }
    return kExitOk;
  }

  for (double a : cfg.attenuation) {
    const ScreenProfile prof = forward_profile(cfg, a, grid, threads);
    const ScreenProfile init = initial_profile(cfg.field(a), grid);
    const std::string stem = "screen_" + a_tag(a);
    if (cfg.screen.scale == Scale::Linear) {
      out.table(stem + "_linear", profile_table(prof));
      const double peak = *std::max_element(prof.intensity.begin(), prof.intensity.end());
      Table zoom{{"coordinate", "zoomed", "clipped"}, {}};
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double z = peak > 0.0 ? prof.intensity[i] * cfg.screen.zoom / peak : 0.0;
        zoom.rows.push_back({grid[i], std::min(z, 1.0), static_cast<long long>(z > 1.0)});
      }
      out.table(stem + "_zoom", zoom);
      out.table(stem + "_initial", profile_table(init));
    }
    std::ostringstream log_csv;
    write_log_profile_csv(log_csv, prof, &init);
    out.raw_csv(stem + "_log", log_csv.str());
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, int threads, std::ostream& log) {
  Writer out(cfg, log);
  const SweepResult s = compute_sweep(cfg, threads);
  Table t{{"a", "distinguishability", "visibility", "residual", "measured_visibility", "bunching_ratio", "locus",
           "onset"},
          {}};
  for (const SweepRow& r : s.rows)
    t.rows.push_back({r.a, r.duality.distinguishability, r.duality.visibility, r.duality.residual,
                      r.measured_visibility, r.bunching_ratio, r.locus,
                      static_cast<long long>(s.onset && *s.onset == r.a)});
  out.table("sweep", t);
  out.document("sweep_summary", {{"rows", s.rows.size()},
                                 {"onset_ratio", cfg.sweep.onset_ratio},
                                 {"onset_a", s.onset ? json(*s.onset) : json(nullptr)}});
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, int threads, std::ostream& log) {
  Writer out(cfg, log);
  const VerifyReport report = run_verify(cfg, threads);
  json checks = json::array();
  for (const CheckResult& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"status", to_string(c.status)},
                      {"value", number(c.value)},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
    log << "check " << c.name << " " << to_string(c.status) << " value=" << format_double(c.value) << " ("
        << c.detail << ")\n";
  }
  const CheckResult* failure = report.first_failure();
  out.document("verify", {{"passed", report.passed()},
                          {"failed_check", failure ? json(failure->name) : json(nullptr)},
                          {"checks", checks}});
  if (failure) log << "verify failed: " << failure->name << "\n";
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

}  // namespace sweeper
