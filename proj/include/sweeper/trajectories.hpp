#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "sweeper/superposition.hpp"

namespace sweeper {

enum class Seeding { EqualCount, DensityWeighted };

std::string_view to_string(Seeding s);
Seeding parse_seeding(std::string_view text);

struct EnsembleSpec {
  int n_per_slit = 500;
  Seeding seeding = Seeding::EqualCount;
  double span = 3.0;  // seeding half-width in units of sigma0
  std::uint64_t seed = 1;
  double t_end = 32.0;
  double dt = 0.01;
  int record_stride = 1;  // keep every k-th step in Trajectory (ordering is checked at every step)

  void validate() const;
  long long steps() const;
};

struct Trajectory {
  int origin_slit = 1;
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> y;
  bool escaped = false;  // left the domain guard; samples stop at the last valid step
  double escape_time = 0.0;
  long long underflow_steps = 0;  // RK4 stages that hit the density floor
};

struct OrderingReport {
  bool preserved = true;
  long long violations = 0;  // (step, neighbour pair) instances out of order
  long long first_violation_step = -1;
};

struct EnsembleResult {
  std::vector<Trajectory> trajectories;  // sorted by initial position
  OrderingReport ordering;
  int escaped = 0;
};

struct Seed {
  int origin_slit = 1;
  double x0 = 0.0;
};

// One classical RK4 step of dx/dt = velocity(x, t).
template <typename VelocityFn>
double rk4_step(VelocityFn&& velocity, double x, double t, double dt) {
  const double k1 = velocity(x, t);
  const double k2 = velocity(x + 0.5 * dt * k1, t + 0.5 * dt);
  const double k3 = velocity(x + 0.5 * dt * k2, t + 0.5 * dt);
  const double k4 = velocity(x + dt * k3, t + dt);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// RK4 on the guidance field; underflowed stages use the dominant channel's
// convective velocity.
double rk4_step(const SuperposedField& f, double x, double t, double dt);

// Transverse half-width beyond which a trajectory counts as escaped:
// max|x_i| + 64 * max sigma_t(t_end).
double domain_guard(const SuperposedField& f, double t_end);

// Initial positions for both slits (channel 2 only when it is open), sorted by x.
std::vector<Seed> seed_positions(const SuperposedField& f, const EnsembleSpec& spec);

// Standard normal quantile.
double normal_quantile(double p);

Trajectory integrate_trajectory(const SuperposedField& f, double x0, const EnsembleSpec& spec,
                                int origin_slit = 1);

// Streams (t_prev, x_prev, t, x) for each step; returning false stops the walk.
using StepObserver = std::function<bool(double, double, double, double)>;
void integrate_path(const SuperposedField& f, double x0, double t_end, double dt,
                    const StepObserver& observer);

EnsembleResult run_ensemble(const SuperposedField& f, const EnsembleSpec& spec, int threads = 1);

// Final transverse positions of the trajectories from one slit.
std::vector<double> endpoints(const EnsembleResult& r, int origin_slit);

}  // namespace sweeper
