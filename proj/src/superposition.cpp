#include "sweeper/superposition.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sweeper {

std::string_view to_string(CoherenceKind kind) {
  switch (kind) {
    case CoherenceKind::Coherent: return "coherent";
    case CoherenceKind::DecoherentFixedPhase: return "decoherent_fixed";
    case CoherenceKind::DecoherentAveraged: return "decoherent_averaged";
  }
  return "unknown";
}

CoherenceKind parse_coherence_kind(std::string_view text) {
  if (text == "coherent") return CoherenceKind::Coherent;
  if (text == "decoherent_fixed") return CoherenceKind::DecoherentFixedPhase;
  if (text == "decoherent_averaged") return CoherenceKind::DecoherentAveraged;
  throw std::invalid_argument("unknown coherence mode '" + std::string(text) + "'");
}

SuperposedField SuperposedField::make(const PhysicalParams& params, ChannelParams ch1,
                                      ChannelParams ch2, double a, CoherenceMode mode) {
  SuperposedField f;
  f.params = params;
  f.ch1 = ch1;
  f.ch2 = ch2;
  f.ch2.weight = std::sqrt(a);
  f.attenuation = a;
  f.mode = mode;
  f.validate();
  return f;
}

SuperposedField SuperposedField::symmetric(const PhysicalParams& params, double half_separation,
                                           double sigma0, double a, CoherenceMode mode) {
  return make(params, ChannelParams{-half_separation, sigma0, 1.0},
              ChannelParams{half_separation, sigma0, 1.0}, a, mode);
}

SuperposedField SuperposedField::single(const PhysicalParams& params, ChannelParams channel) {
  channel.weight = 1.0;
  ChannelParams closed = channel;
  return make(params, channel, closed, 0.0, {});
}

SuperposedField SuperposedField::mirrored() const {
  SuperposedField m = *this;
  m.ch1.center = -ch1.center;
  m.ch2.center = -ch2.center;
  return m;
}

void SuperposedField::validate() const {
  params.validate();
  ch1.validate();
  ch2.validate();
  if (!(attenuation >= 0.0 && attenuation <= 1.0))
    throw std::invalid_argument("attenuation must lie in [0, 1]");
  if (std::abs(ch2.weight * ch2.weight - attenuation) > 1e-15)
    throw std::invalid_argument("channel 2 weight must equal sqrt(attenuation)");
  if (!(density_floor >= 0.0)) throw std::invalid_argument("density floor must be >= 0");
  if (!std::isfinite(mode.extra_phase)) throw std::invalid_argument("extra phase must be finite");
}

namespace {

struct Pair {
  FieldSample s1;
  FieldSample s2;
  double cos_phi = 0.0;
  double sin_phi = 0.0;
};

double coherent_phase(const SuperposedField& f, const FieldSample& s1, const FieldSample& s2) {
  return (s2.phase - s1.phase) / f.params.hbar + f.mode.extra_phase;
}

Pair evaluate(const SuperposedField& f, double x, double t) {
  Pair p;
  p.s1 = sample_channel(f.params, f.ch1, x, t);
  p.s2 = sample_channel(f.params, f.ch2, x, t);
  switch (f.mode.kind) {
    case CoherenceKind::Coherent: {
      const double phi = coherent_phase(f, p.s1, p.s2);
      p.cos_phi = std::cos(phi);
      p.sin_phi = std::sin(phi);
      break;
    }
    case CoherenceKind::DecoherentFixedPhase:
      p.cos_phi = 0.0;
      p.sin_phi = 1.0;
      break;
    case CoherenceKind::DecoherentAveraged:
      p.cos_phi = 0.0;
      p.sin_phi = std::sin(coherent_phase(f, p.s1, p.s2));
      break;
  }
  return p;
}

}  // namespace

double relative_phase(const SuperposedField& f, double x, double t) {
  const FieldSample s1 = sample_channel(f.params, f.ch1, x, t);
  const FieldSample s2 = sample_channel(f.params, f.ch2, x, t);
  return coherent_phase(f, s1, s2);
}

double projection_intensity(const SuperposedField& f, double x, double t,
                            ProjectionComponent component) {
  const Pair p = evaluate(f, x, t);
  const double r1 = p.s1.amplitude;
  const double r2 = p.s2.amplitude;
  const double cross_cos = r1 * r2 * p.cos_phi;
  const double cross_sin = f.zero_sin_term ? 0.0 : r1 * r2 * p.sin_phi;
  switch (component) {
    case ProjectionComponent::V1: return r1 * r1 + cross_cos;
    case ProjectionComponent::V2: return r2 * r2 + cross_cos;
    case ProjectionComponent::U1R: return cross_sin;
    case ProjectionComponent::U1L: return -cross_sin;
    case ProjectionComponent::U2R: return -cross_sin;
    case ProjectionComponent::U2L: return cross_sin;
  }
  return 0.0;
}

double component_velocity(const SuperposedField& f, double x, double t,
                          ProjectionComponent component) {
  switch (component) {
    case ProjectionComponent::V1: return sample_channel(f.params, f.ch1, x, t).v;
    case ProjectionComponent::V2: return sample_channel(f.params, f.ch2, x, t).v;
    case ProjectionComponent::U1R: return 0.5 * sample_channel(f.params, f.ch1, x, t).u;
    case ProjectionComponent::U1L: return -0.5 * sample_channel(f.params, f.ch1, x, t).u;
    case ProjectionComponent::U2R: return 0.5 * sample_channel(f.params, f.ch2, x, t).u;
    case ProjectionComponent::U2L: return -0.5 * sample_channel(f.params, f.ch2, x, t).u;
  }
  return 0.0;
}

double total_density(const SuperposedField& f, double x, double t) {
  const Pair p = evaluate(f, x, t);
  const double r1 = p.s1.amplitude;
  const double r2 = p.s2.amplitude;
  return r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * p.cos_phi;
}

CurrentSample total_current(const SuperposedField& f, double x, double t) {
  const Pair p = evaluate(f, x, t);
  const double r1 = p.s1.amplitude;
  const double r2 = p.s2.amplitude;

  CurrentSample c;
  c.density = r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * p.cos_phi;
  // Interference minima can round a few ulps below zero.
  if (c.density < 0.0) c.density = 0.0;
  c.cos_term = r1 * r2 * (p.s1.v + p.s2.v) * p.cos_phi;
  c.sin_term = f.zero_sin_term ? 0.0 : r1 * r2 * (p.s1.u - p.s2.u) * p.sin_phi;
  c.current = r1 * r1 * p.s1.v + r2 * r2 * p.s2.v + c.cos_term + c.sin_term;
  c.v_tot = c.density > 0.0 ? c.current / c.density : 0.0;
  return c;
}

Guidance guidance_velocity(const SuperposedField& f, double x, double t) {
  const CurrentSample c = total_current(f, x, t);
  if (c.density > f.density_floor && c.density > 0.0) return {c.v_tot, false};

  const double l1 = log_amplitude(f.params, f.ch1, x, t);
  const double l2 = log_amplitude(f.params, f.ch2, x, t);
  const ChannelParams& dominant = l2 > l1 ? f.ch2 : f.ch1;
  return {sample_channel(f.params, dominant, x, t).v, true};
}

double no_crossing_locus(const SuperposedField& f, double t) {
  // u_i = k_i (x - x_i) with k_i = hbar / (2 m sigma_t,i^2).
  const double w1 = dispersed_width(f.params, f.ch1, t);
  const double w2 = dispersed_width(f.params, f.ch2, t);
  const double k1 = 1.0 / (w1 * w1);
  const double k2 = 1.0 / (w2 * w2);
  return (k1 * f.ch1.center + k2 * f.ch2.center) / (k1 + k2);
}

std::vector<InterferenceNode> interference_map(const SuperposedField& f, std::span<const double> xs,
                                               std::span<const double> ts) {
  std::vector<InterferenceNode> out;
  out.reserve(xs.size() * ts.size());
  for (double t : ts) {
    for (double x : xs) {
      const CurrentSample c = total_current(f, x, t);
      out.push_back({x, t, c.cos_term, c.sin_term, c.density, c.current});
    }
  }
  return out;
}

}  // namespace sweeper
