#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sweeper/config.hpp"

namespace sweeper {

inline constexpr const char* kToolVersion = "sweeper 1.0.0";

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitConfig = 2, kExitIo = 3 };

// Largest deviation from the wave-function density and current on an
// nx-by-nt grid, each divided by the grid maximum of the reference quantity.
struct OracleDeviation {
  double density = 0.0;
  double current = 0.0;
};
OracleDeviation oracle_deviation(const SuperposedField& f, double t_end, int nx = 200, int nt = 50);

// Continuity residual ratio r(h) / r(h/2) at (x, t); 4 for a second-order scheme.
double continuity_ratio(const SuperposedField& f, double x, double t);

struct SamplePoint {
  double x = 0.0;
  double t = 0.0;
};
// Uniform points with t in [t_end/64, t_end] and x within 3 sigma_t of the slits.
std::vector<SamplePoint> continuity_points(const SuperposedField& f, double t_end, std::size_t n,
                                           std::uint64_t seed);

// Maximum |x(t)| / t over a trajectory started on the midline.
double midline_drift(const SuperposedField& f, const EnsembleSpec& spec);

// Ensemble of the lone channel 2, used as the bunching baseline.
std::vector<double> baseline_endpoints(const RunConfig& cfg, int threads);

// Envelope-corrected visibility at the configured far-field distance; NaN without fringes.
double measured_visibility(const RunConfig& cfg, double a, AttenuationMode mode, int threads = 1);

struct SweepRow {
  double a = 0.0;
  DualityMetrics duality;
  double measured_visibility = 0.0;
  double bunching_ratio = 0.0;  // NaN when channel 2 is closed
  double locus = 0.0;           // no-crossing point at t_end
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> onset;  // largest a with bunching_ratio <= onset_ratio
};
SweepResult compute_sweep(const RunConfig& cfg, int threads);

enum class CheckStatus { Pass, Fail, Informational };
std::string_view to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
  const CheckResult* first_failure() const;
};
VerifyReport run_verify(const RunConfig& cfg, int threads);

// Subcommands. Outputs go to cfg.output_dir; progress lines go to `log`.
// Throw IoError when an output cannot be written.
int cmd_trajectories(const RunConfig& cfg, int threads, std::ostream& log);
int cmd_screen(const RunConfig& cfg, int threads, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, int threads, std::ostream& log);
int cmd_verify(const RunConfig& cfg, int threads, std::ostream& log);

}  // namespace sweeper
