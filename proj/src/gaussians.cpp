#include "sweeper/gaussians.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sweeper {

void PhysicalParams::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("hbar must be > 0");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be > 0");
  if (!(v_forward > 0.0) || !std::isfinite(v_forward))
    throw std::invalid_argument("v_forward must be > 0");
}

void ChannelParams::validate() const {
  if (!std::isfinite(center)) throw std::invalid_argument("channel center must be finite");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
    throw std::invalid_argument("sigma0 must be > 0");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("channel weight must be >= 0");
}

double spreading_rate(const PhysicalParams& p, const ChannelParams& c) {
  return p.hbar / (2.0 * p.mass * c.sigma0 * c.sigma0);
}

double dispersed_width(const PhysicalParams& p, const ChannelParams& c, double t) {
  const double tau = spreading_rate(p, c) * t;
  return c.sigma0 * std::sqrt(1.0 + tau * tau);
}

double relative_width_rate(const PhysicalParams& p, const ChannelParams& c, double t) {
  const double alpha = spreading_rate(p, c);
  const double tau = alpha * t;
  return alpha * tau / (1.0 + tau * tau);
}

FieldSample sample_channel(const PhysicalParams& p, const ChannelParams& c, double x, double t) {
  const double alpha = spreading_rate(p, c);
  const double tau = alpha * t;
  const double var_t = c.sigma0 * c.sigma0 * (1.0 + tau * tau);
  const double d = x - c.center;

  FieldSample s;
  s.amplitude = c.weight * std::pow(2.0 * std::numbers::pi * var_t, -0.25) *
                std::exp(-d * d / (4.0 * var_t));
  s.log_amp_gradient = -d / (2.0 * var_t);
  // The -atan(tau)/2 term is constant in x; it is the Gouy-type phase of the
  // spreading packet and is kept so that absolute phases match the complex packet.
  s.phase = p.hbar * (d * d * tau / (4.0 * var_t) - 0.5 * std::atan(tau));
  s.phase_gradient = p.hbar * d * tau / (2.0 * var_t);
  s.v = s.phase_gradient / p.mass;
  s.u = -(p.hbar / p.mass) * s.log_amp_gradient;
  return s;
}

double log_amplitude(const PhysicalParams& p, const ChannelParams& c, double x, double t) {
  if (c.weight == 0.0) return -std::numeric_limits<double>::infinity();
  const double tau = spreading_rate(p, c) * t;
  const double var_t = c.sigma0 * c.sigma0 * (1.0 + tau * tau);
  const double d = x - c.center;
  return std::log(c.weight) - 0.25 * std::log(2.0 * std::numbers::pi * var_t) -
         d * d / (4.0 * var_t);
}

}  // namespace sweeper
