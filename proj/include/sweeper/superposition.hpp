#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "sweeper/gaussians.hpp"

namespace sweeper {

enum class CoherenceKind {
  Coherent,
  DecoherentFixedPhase,  // cos(phi) = 0, sin(phi) = 1 everywhere
  DecoherentAveraged,    // cos(phi) = 0, sin(phi) from the coherent phase
};

struct CoherenceMode {
  CoherenceKind kind = CoherenceKind::Coherent;
  double extra_phase = 0.0;  // added to phi in Coherent mode only
};

std::string_view to_string(CoherenceKind kind);
CoherenceKind parse_coherence_kind(std::string_view text);

inline constexpr double kDefaultDensityFloor = 1e-280;

// Two Gaussian channels; channel 2 is attenuated by the transmission factor a,
// which enters as the amplitude weight sqrt(a).
struct SuperposedField {
  PhysicalParams params;
  ChannelParams ch1;
  ChannelParams ch2;
  double attenuation = 1.0;
  CoherenceMode mode;
  double density_floor = kDefaultDensityFloor;
  // Negative-control hook: drops the sin interference term from the current.
  bool zero_sin_term = false;

  // ch2.weight is overwritten with sqrt(a).
  static SuperposedField make(const PhysicalParams& params, ChannelParams ch1, ChannelParams ch2,
                              double a, CoherenceMode mode = {});

  // Slits at -half_separation (channel 1) and +half_separation (channel 2).
  static SuperposedField symmetric(const PhysicalParams& params, double half_separation,
                                   double sigma0, double a, CoherenceMode mode = {});

  // Only `channel` open, with unit weight; used as the single-slit baseline.
  static SuperposedField single(const PhysicalParams& params, ChannelParams channel);

  // Slits and roles mirrored through x = 0.
  SuperposedField mirrored() const;

  void validate() const;
};

struct CurrentSample {
  double density = 0.0;
  double current = 0.0;
  double v_tot = 0.0;
  double cos_term = 0.0;  // R1 R2 (v1 + v2) cos(phi)
  double sin_term = 0.0;  // R1 R2 (u1 - u2) sin(phi)
};

// Velocity handed to the integrator. When the density falls below the field's
// floor, `density_underflow` is set and `velocity` is the convective velocity
// of whichever channel has the larger amplitude at that point.
struct Guidance {
  double velocity = 0.0;
  bool density_underflow = false;
};

enum class ProjectionComponent { V1, U1L, U1R, V2, U2L, U2R };

double relative_phase(const SuperposedField& f, double x, double t);

// Pairwise projection intensity of one velocity component. The left/right
// diffusive split is u_iR = -u_iL = u_i / 2, so the six partial currents add
// up to total_current().
double projection_intensity(const SuperposedField& f, double x, double t,
                            ProjectionComponent component);

// Velocity carried by a projection component (v_i, or +-u_i/2).
double component_velocity(const SuperposedField& f, double x, double t,
                          ProjectionComponent component);

double total_density(const SuperposedField& f, double x, double t);

CurrentSample total_current(const SuperposedField& f, double x, double t);

Guidance guidance_velocity(const SuperposedField& f, double x, double t);

// Root of u1 + u2 = 0. u_i is linear in x, so the root is unique and lies
// between the two centers; it is independent of the channel weights.
double no_crossing_locus(const SuperposedField& f, double t);

struct InterferenceNode {
  double x = 0.0;
  double t = 0.0;
  double cos_term = 0.0;
  double sin_term = 0.0;
  double density = 0.0;
  double current = 0.0;
};

// Row-major over (t, x): all x for the first t, then the next t, ...
std::vector<InterferenceNode> interference_map(const SuperposedField& f, std::span<const double> xs,
                                               std::span<const double> ts);

}  // namespace sweeper
