#pragma once

// Reference values from ordinary wave mechanics: complex free Gaussian packets,
// their superposition, and the density/current read off the wave function.
// Nothing here calls into the channel or superposition formulas, so agreement
// with those modules is an independent check.

#include <complex>
#include <span>

#include "sweeper/gaussians.hpp"
#include "sweeper/superposition.hpp"

namespace sweeper::oracle {

struct ComplexPacket {
  ChannelParams channel;
  std::complex<double> value;
  std::complex<double> gradient;
};

ComplexPacket packet(const PhysicalParams& p, const ChannelParams& c, double x, double t);

// psi = sum_i packet_i (weights already carried by the channels).
struct WaveSample {
  std::complex<double> value;
  std::complex<double> gradient;
};

WaveSample superpose(const PhysicalParams& p, std::span<const ChannelParams> channels, double x,
                     double t);

// psi for the two channels of `f`, with the extra phase attached to channel 2.
WaveSample wave(const SuperposedField& f, double x, double t);

double qm_density(const WaveSample& psi);

// (hbar / m) Im(conj(psi) dpsi/dx)
double qm_current(const PhysicalParams& p, const WaveSample& psi);

// Central-difference residual of dP/dt + dJ/dx = 0 for the superposed field's
// own density and current. Requires t > h_t.
double continuity_residual(const SuperposedField& f, double x, double t, double h_x, double h_t);

}  // namespace sweeper::oracle
