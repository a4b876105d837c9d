#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "sweeper/superposition.hpp"
#include "sweeper/trajectories.hpp"

namespace sweeper {

enum class Orientation { Forward, Orthogonal };
enum class Scale { Linear, Log };

// Forward: grid is transverse x at y = distance.
// Orthogonal: grid is forward y along the line x = distance.
struct ScreenProfile {
  double distance = 0.0;
  Orientation orientation = Orientation::Forward;
  std::vector<double> grid;
  std::vector<double> intensity;
  Scale scale = Scale::Linear;

  void validate() const;
};

struct DualityMetrics {
  double distinguishability = 0.0;
  double visibility = 0.0;
  double residual = 0.0;  // D^2 + V^2 - 1
};

class NoFringesDetected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> linspace(double lo, double hi, std::size_t n);

// Time at which the forward drift reaches distance L.
double screen_time(const PhysicalParams& p, double distance);

ScreenProfile stochastic_profile(const SuperposedField& f, double distance,
                                 std::span<const double> grid, int threads = 1);

// (1 - a) |psi_1|^2 + a |psi_1 + psi_2|^2. `one_slit` must have channel 2
// closed and `both_slits` must have it fully open.
ScreenProfile chopper_profile(const SuperposedField& one_slit, const SuperposedField& both_slits,
                              double a, double distance, std::span<const double> grid,
                              int threads = 1);

// Density of the field at t = 0 sampled on `grid` (the slit-plane distribution).
ScreenProfile initial_profile(const SuperposedField& f, std::span<const double> grid);

// Spatial fringe period at time t (equal-width channels give an x-independent value).
double fringe_period(const SuperposedField& f, double t);

// Envelope-corrected fringe contrast inside [lo, hi]. The log intensity is
// detrended by a least-squares quadratic, extrema of the residual are refined
// parabolically, and each interior extremum is compared with the linear
// interpolation of its two opposite-type neighbours. The contrasts of the 5
// extrema nearest the window centre are averaged. Fewer than two maxima and
// two minima throws NoFringesDetected.
double fringe_visibility(const ScreenProfile& profile, double lo, double hi);

DualityMetrics duality_metrics(double a);

struct BunchingReport {
  std::size_t count = 0;
  double iqr = 0.0;
  double peak_position = 0.0;
  double peak_fraction = 0.0;  // share of endpoints within peak +- iqr/2
  double baseline_iqr = 0.0;
  double ratio = 0.0;  // iqr / baseline_iqr
};

// Linear-interpolated quantile of unsorted data.
double quantile(std::vector<double> values, double q);

BunchingReport bunching_metrics(std::span<const double> endpoints, std::span<const double> baseline);

struct Arrival {
  int origin_slit = 1;
  double t = 0.0;
  double y = 0.0;
  double angle_deg = 0.0;  // atan2(x_screen, y), measured from the forward axis
};

// First crossings of the line x = x_screen by trajectories seeded per `spec`.
std::vector<Arrival> orthogonal_arrivals(const SuperposedField& f, const EnsembleSpec& spec,
                                         double x_screen, double t_end, int threads = 1);

struct ArrivalBand {
  std::size_t count = 0;
  double median_angle_deg = 0.0;
  double width_deg = 0.0;  // 5th to 95th percentile span
};

ArrivalBand arrival_band(std::span<const Arrival> arrivals, int origin_slit);

// Arrival counts per unit y on the bins delimited by `edges`; grid holds bin centres.
ScreenProfile orthogonal_profile(std::span<const Arrival> arrivals, double x_screen,
                                 std::span<const double> edges, std::optional<int> origin_slit = {});

inline constexpr double kLogFloorRatio = 1e-30;

struct LogSample {
  double coordinate = 0.0;
  double log10_intensity = 0.0;
  bool clamped = false;
};

// log10 intensity with values below floor_ratio * peak replaced by the floor.
std::vector<LogSample> log_scale(const ScreenProfile& profile, double floor_ratio = kLogFloorRatio);

// CSV: coordinate,log10_intensity,clamped[,log10_initial,initial_clamped]
void write_log_profile_csv(std::ostream& out, const ScreenProfile& profile,
                           const ScreenProfile* initial = nullptr,
                           double floor_ratio = kLogFloorRatio);

}  // namespace sweeper
