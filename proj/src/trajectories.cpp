#include "sweeper/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "sweeper/parallel.hpp"

namespace sweeper {

std::string_view to_string(Seeding s) {
  return s == Seeding::EqualCount ? "equal_count" : "density_weighted";
}

Seeding parse_seeding(std::string_view text) {
  if (text == "equal_count") return Seeding::EqualCount;
  if (text == "density_weighted") return Seeding::DensityWeighted;
  throw std::invalid_argument("unknown seeding '" + std::string(text) + "'");
}

void EnsembleSpec::validate() const {
  if (n_per_slit < 1) throw std::invalid_argument("n_per_slit must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be > 0");
  if (!(span > 0.0) || !std::isfinite(span)) throw std::invalid_argument("span must be > 0");
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
}

long long EnsembleSpec::steps() const { return std::max(1LL, std::llround(t_end / dt)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal quantile needs p in (0, 1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double guided_velocity(const SuperposedField& f, double x, double t, long long* underflows) {
  const Guidance g = guidance_velocity(f, x, t);
  if (g.density_underflow && underflows != nullptr) ++*underflows;
  return g.velocity;
}

double rk4_counted(const SuperposedField& f, double x, double t, double dt, long long* underflows) {
  return rk4_step([&](double xx, double tt) { return guided_velocity(f, xx, tt, underflows); }, x,
                  t, dt);
}

}  // namespace

double rk4_step(const SuperposedField& f, double x, double t, double dt) {
  return rk4_counted(f, x, t, dt, nullptr);
}

double domain_guard(const SuperposedField& f, double t_end) {
  const double reach = std::max(std::abs(f.ch1.center), std::abs(f.ch2.center));
  const double width = std::max(dispersed_width(f.params, f.ch1, t_end),
                                dispersed_width(f.params, f.ch2, t_end));
  return reach + 64.0 * width;
}

std::vector<Seed> seed_positions(const SuperposedField& f, const EnsembleSpec& spec) {
  spec.validate();
  const double lo = normal_cdf(-spec.span);
  const double hi = normal_cdf(spec.span);
  std::mt19937_64 rng(spec.seed);

  std::vector<Seed> seeds;
  auto seed_channel = [&](const ChannelParams& c, int slit) {
    if (c.weight == 0.0) return;
    for (int j = 0; j < spec.n_per_slit; ++j) {
      double q;
      if (spec.seeding == Seeding::EqualCount) {
        q = (j + 0.5) / spec.n_per_slit;
      } else {
        q = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      }
      const double z = normal_quantile(lo + q * (hi - lo));
      seeds.push_back({slit, c.center + c.sigma0 * z});
    }
  };
  seed_channel(f.ch1, 1);
  seed_channel(f.ch2, 2);
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const Seed& a, const Seed& b) { return a.x0 < b.x0; });
  return seeds;
}

namespace {

// Integrates one seed and writes every step's position into `row`; returns
// the number of valid samples (steps + 1 unless the trajectory escaped).
long long integrate_row(const SuperposedField& f, double x0, double dt, long long steps,
                        double guard, double* row, long long* underflows) {
  double x = x0;
  row[0] = x;
  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    x = rk4_counted(f, x, t, dt, underflows);
    if (!std::isfinite(x) || std::abs(x) > guard) return k + 1;
    row[k + 1] = x;
  }
  return steps + 1;
}

Trajectory assemble(const SuperposedField& f, const EnsembleSpec& spec, int slit,
                    const double* row, long long valid, long long underflows) {
  const long long steps = spec.steps();
  Trajectory tr;
  tr.origin_slit = slit;
  tr.underflow_steps = underflows;
  tr.escaped = valid < steps + 1;
  if (tr.escaped) tr.escape_time = static_cast<double>(valid) * spec.dt;
  const std::size_t keep = static_cast<std::size_t>((valid - 1) / spec.record_stride + 1);
  tr.times.reserve(keep + 1);
  tr.x.reserve(keep + 1);
  tr.y.reserve(keep + 1);
  auto push = [&](long long k) {
    const double t = static_cast<double>(k) * spec.dt;
    tr.times.push_back(t);
    tr.x.push_back(row[k]);
    tr.y.push_back(f.params.v_forward * t);
  };
  for (long long k = 0; k < valid; k += spec.record_stride) push(k);
  if ((valid - 1) % spec.record_stride != 0) push(valid - 1);
  return tr;
}

}  // namespace

Trajectory integrate_trajectory(const SuperposedField& f, double x0, const EnsembleSpec& spec,
                                int origin_slit) {
  spec.validate();
  if (!std::isfinite(x0)) throw std::invalid_argument("x0 must be finite");
  const long long steps = spec.steps();
  std::vector<double> row(static_cast<std::size_t>(steps + 1));
  long long underflows = 0;
  const long long valid =
      integrate_row(f, x0, spec.dt, steps, domain_guard(f, spec.t_end), row.data(), &underflows);
  return assemble(f, spec, origin_slit, row.data(), valid, underflows);
}

void integrate_path(const SuperposedField& f, double x0, double t_end, double dt,
                    const StepObserver& observer) {
  const long long steps = std::max(1LL, std::llround(t_end / dt));
  double x = x0;
  for (long long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double next = rk4_step(f, x, t, dt);
    if (!observer(t, x, static_cast<double>(k + 1) * dt, next)) return;
    x = next;
  }
}

EnsembleResult run_ensemble(const SuperposedField& f, const EnsembleSpec& spec, int threads) {
  const std::vector<Seed> seeds = seed_positions(f, spec);
  const long long steps = spec.steps();
  const std::size_t n = seeds.size();
  const std::size_t width = static_cast<std::size_t>(steps + 1);
  const double guard = domain_guard(f, spec.t_end);

  std::vector<double> history(n * width, std::numeric_limits<double>::quiet_NaN());
  std::vector<long long> valid(n, 0);
  std::vector<long long> underflows(n, 0);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      valid[i] = integrate_row(f, seeds[i].x0, spec.dt, steps, guard, &history[i * width],
                               &underflows[i]);
    }
  };
  parallel_for(n, threads, work);

  EnsembleResult result;
  for (long long k = 0; k <= steps; ++k) {
    const double* prev = nullptr;
    for (std::size_t i = 0; i < n; ++i) {
      if (k >= valid[i]) continue;
      const double* cur = &history[i * width + static_cast<std::size_t>(k)];
      if (prev != nullptr && !(*cur > *prev)) {
        ++result.ordering.violations;
        if (result.ordering.first_violation_step < 0) result.ordering.first_violation_step = k;
      }
      prev = cur;
    }
  }
  result.ordering.preserved = result.ordering.violations == 0;

  result.trajectories.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.trajectories.push_back(
        assemble(f, spec, seeds[i].origin_slit, &history[i * width], valid[i], underflows[i]));
    if (result.trajectories.back().escaped) ++result.escaped;
  }
  return result;
}

std::vector<double> endpoints(const EnsembleResult& r, int origin_slit) {
  std::vector<double> out;
  for (const Trajectory& t : r.trajectories) {
    if (t.origin_slit == origin_slit && !t.escaped) out.push_back(t.x.back());
  }
  return out;
}

}  // namespace sweeper
