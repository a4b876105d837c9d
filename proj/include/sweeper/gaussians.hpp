#pragma once

// Closed-form free evolution of a single Gaussian slit channel.
//
// A channel released at t = 0 with width sigma0 around `center` spreads as
//   sigma_t = sigma0 * sqrt(1 + (hbar t / (2 m sigma0^2))^2)
// and carries the amplitude R, phase S and the two velocity fields
//   v = grad(S) / m            (convective)
//   u = -(hbar / m) grad(R)/R  (diffusive)
// evaluated here without any complex arithmetic.

namespace sweeper {

struct PhysicalParams {
  double hbar = 1.0;
  double mass = 1.0;
  double v_forward = 1.0;  // maps time to forward distance, y = v_forward * t

  void validate() const;
};

struct ChannelParams {
  double center = 0.0;
  double sigma0 = 1.0;
  double weight = 1.0;

  void validate() const;
};

struct FieldSample {
  double amplitude = 0.0;          // R
  double log_amp_gradient = 0.0;   // grad(R)/R
  double phase = 0.0;              // S
  double phase_gradient = 0.0;     // grad(S)
  double v = 0.0;
  double u = 0.0;
};

// hbar / (2 m sigma0^2): inverse spreading time of the channel.
double spreading_rate(const PhysicalParams& p, const ChannelParams& c);

double dispersed_width(const PhysicalParams& p, const ChannelParams& c, double t);

// (d sigma_t / dt) / sigma_t
double relative_width_rate(const PhysicalParams& p, const ChannelParams& c, double t);

FieldSample sample_channel(const PhysicalParams& p, const ChannelParams& c, double x, double t);

// log R, finite for any x as long as weight > 0; -inf for weight 0.
double log_amplitude(const PhysicalParams& p, const ChannelParams& c, double x, double t);

}  // namespace sweeper
