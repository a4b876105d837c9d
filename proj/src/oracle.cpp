#include "sweeper/oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sweeper::oracle {

using cd = std::complex<double>;

ComplexPacket packet(const PhysicalParams& p, const ChannelParams& c, double x, double t) {
  // psi = w (2 pi s0^2)^(-1/4) (1 + i hbar t / (2 m s0^2))^(-1/2)
  //       * exp(-(x - x0)^2 / (4 s0^2 (1 + i hbar t / (2 m s0^2))))
  const double s0sq = c.sigma0 * c.sigma0;
  const cd spread(1.0, p.hbar * t / (2.0 * p.mass * s0sq));
  const double d = x - c.center;
  const cd exponent = -(d * d) / (4.0 * s0sq * spread);
  const cd norm = c.weight * std::pow(2.0 * std::numbers::pi * s0sq, -0.25) / std::sqrt(spread);

  ComplexPacket out;
  out.channel = c;
  out.value = norm * std::exp(exponent);
  out.gradient = out.value * (-d / (2.0 * s0sq * spread));
  return out;
}

WaveSample superpose(const PhysicalParams& p, std::span<const ChannelParams> channels, double x,
                     double t) {
  WaveSample psi{};
  for (const ChannelParams& c : channels) {
    const ComplexPacket k = packet(p, c, x, t);
    psi.value += k.value;
    psi.gradient += k.gradient;
  }
  return psi;
}

WaveSample wave(const SuperposedField& f, double x, double t) {
  const ComplexPacket a = packet(f.params, f.ch1, x, t);
  const ComplexPacket b = packet(f.params, f.ch2, x, t);
  const cd shift = std::polar(1.0, f.mode.extra_phase);
  return {a.value + shift * b.value, a.gradient + shift * b.gradient};
}

double qm_density(const WaveSample& psi) { return std::norm(psi.value); }

double qm_current(const PhysicalParams& p, const WaveSample& psi) {
  return p.hbar / p.mass * std::imag(std::conj(psi.value) * psi.gradient);
}

double continuity_residual(const SuperposedField& f, double x, double t, double h_x, double h_t) {
  if (!(h_x > 0.0) || !(h_t > 0.0)) throw std::invalid_argument("steps must be positive");
  if (t - h_t < 0.0) throw std::invalid_argument("t must exceed the time step");
  const double dp_dt =
      (total_density(f, x, t + h_t) - total_density(f, x, t - h_t)) / (2.0 * h_t);
  const double dj_dx =
      (total_current(f, x + h_x, t).current - total_current(f, x - h_x, t).current) / (2.0 * h_x);
  return dp_dt + dj_dx;
}

}  // namespace sweeper::oracle
