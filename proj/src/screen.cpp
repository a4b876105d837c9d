#include "sweeper/screen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>

#include "sweeper/csv.hpp"
#include "sweeper/parallel.hpp"

namespace sweeper {

void ScreenProfile::validate() const {
  if (grid.size() != intensity.size()) throw std::invalid_argument("grid/intensity size mismatch");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
  }
  for (double v : intensity) {
    if (!(v >= 0.0)) throw std::invalid_argument("intensity must be nonnegative");
  }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace needs at least two points");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

double screen_time(const PhysicalParams& p, double distance) {
  if (!(distance > 0.0)) throw std::invalid_argument("screen distance must be > 0");
  return distance / p.v_forward;
}

namespace {

ScreenProfile density_profile(const SuperposedField& f, double distance, double t,
                              std::span<const double> grid, int threads) {
  ScreenProfile prof;
  prof.distance = distance;
  prof.grid.assign(grid.begin(), grid.end());
  prof.intensity.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      prof.intensity[i] = std::max(0.0, total_density(f, grid[i], t));
    }
  });
  prof.validate();
  return prof;
}

}  // namespace

ScreenProfile stochastic_profile(const SuperposedField& f, double distance,
                                 std::span<const double> grid, int threads) {
  return density_profile(f, distance, screen_time(f.params, distance), grid, threads);
}

ScreenProfile chopper_profile(const SuperposedField& one_slit, const SuperposedField& both_slits,
                              double a, double distance, std::span<const double> grid,
                              int threads) {
  if (one_slit.attenuation != 0.0) throw std::invalid_argument("one_slit field must have a = 0");
  if (both_slits.attenuation != 1.0) throw std::invalid_argument("both_slits field must have a = 1");
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("a must lie in [0, 1]");
  const double t = screen_time(both_slits.params, distance);
  ScreenProfile lone = density_profile(one_slit, distance, t, grid, threads);
  const ScreenProfile both = density_profile(both_slits, distance, t, grid, threads);
  for (std::size_t i = 0; i < lone.intensity.size(); ++i) {
    lone.intensity[i] = (1.0 - a) * lone.intensity[i] + a * both.intensity[i];
  }
  return lone;
}

ScreenProfile initial_profile(const SuperposedField& f, std::span<const double> grid) {
  ScreenProfile prof;
  prof.grid.assign(grid.begin(), grid.end());
  prof.intensity.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    prof.intensity[i] = std::max(0.0, total_density(f, grid[i], 0.0));
  }
  return prof;
}

double fringe_period(const SuperposedField& f, double t) {
  // Wavenumber of phi at the midpoint between the slits.
  const double mid = 0.5 * (f.ch1.center + f.ch2.center);
  const FieldSample s1 = sample_channel(f.params, f.ch1, mid, t);
  const FieldSample s2 = sample_channel(f.params, f.ch2, mid, t);
  const double k = std::abs(s2.phase_gradient - s1.phase_gradient) / f.params.hbar;
  if (!(k > 0.0)) throw std::domain_error("no fringes at this time");
  return 2.0 * std::numbers::pi / k;
}

namespace {

struct Extremum {
  double x = 0.0;
  double value = 0.0;
  bool is_max = false;
};

std::array<double, 3> fit_quadratic(std::span<const double> u, std::span<const double> y) {
  // Normal equations for y ~ c0 + c1 u + c2 u^2.
  double s[5] = {0, 0, 0, 0, 0};
  double b[3] = {0, 0, 0};
  for (std::size_t i = 0; i < u.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k < 5; ++k) {
      s[k] += p;
      if (k < 3) b[k] += p * y[i];
      p *= u[i];
    }
  }
  double m[3][4] = {{s[0], s[1], s[2], b[0]}, {s[1], s[2], s[3], b[1]}, {s[2], s[3], s[4], b[2]}};
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    for (int k = 0; k < 4; ++k) std::swap(m[c][k], m[piv][k]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double factor = m[r][c] / m[c][c];
      for (int k = c; k < 4; ++k) m[r][k] -= factor * m[c][k];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

}  // namespace

double fringe_visibility(const ScreenProfile& profile, double lo, double hi) {
  profile.validate();
  if (!(hi > lo)) throw std::invalid_argument("visibility window must have hi > lo");

  std::vector<double> xs;
  std::vector<double> intensity;
  double peak = 0.0;
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    if (profile.grid[i] < lo || profile.grid[i] > hi) continue;
    xs.push_back(profile.grid[i]);
    intensity.push_back(profile.intensity[i]);
    peak = std::max(peak, profile.intensity[i]);
  }
  if (xs.size() < 7 || !(peak > 0.0)) throw NoFringesDetected("window holds too few samples");

  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::vector<double> u(xs.size());
  std::vector<double> logs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    u[i] = (xs[i] - centre) / half;
    logs[i] = std::log(std::max(intensity[i], peak * 1e-300));
  }
  const auto c = fit_quadratic(u, logs);
  std::vector<double> g(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    g[i] = std::exp(logs[i] - (c[0] + c[1] * u[i] + c[2] * u[i] * u[i]));
  }

  std::vector<Extremum> ext;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const bool is_max = g[i] > g[i - 1] && g[i] >= g[i + 1];
    const bool is_min = g[i] < g[i - 1] && g[i] <= g[i + 1];
    if (!is_max && !is_min) continue;
    const double curv = g[i - 1] - 2.0 * g[i] + g[i + 1];
    double offset = 0.0;
    double value = g[i];
    if (curv != 0.0) {
      offset = std::clamp(0.5 * (g[i - 1] - g[i + 1]) / curv, -0.5, 0.5);
      value = g[i] - 0.25 * (g[i - 1] - g[i + 1]) * offset;
    }
    const double step = offset >= 0.0 ? xs[i + 1] - xs[i] : xs[i] - xs[i - 1];
    ext.push_back({xs[i] + offset * step, value, is_max});
  }

  // Drop round-off wiggles: adjacent extrema that differ by less than 1e-9
  // relative are removed pairwise, then same-type neighbours are merged.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; j + 1 < ext.size(); ++j) {
      const double a = ext[j].value;
      const double b = ext[j + 1].value;
      if (ext[j].is_max != ext[j + 1].is_max && std::abs(a - b) <= 1e-9 * (a + b)) {
        ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(j),
                  ext.begin() + static_cast<std::ptrdiff_t>(j + 2));
        changed = true;
        break;
      }
      if (ext[j].is_max == ext[j + 1].is_max) {
        const bool keep_first = ext[j].is_max ? a >= b : a <= b;
        ext.erase(ext.begin() + static_cast<std::ptrdiff_t>(keep_first ? j + 1 : j));
        changed = true;
        break;
      }
    }
  }

  const auto maxima = std::count_if(ext.begin(), ext.end(), [](const Extremum& e) { return e.is_max; });
  const auto minima = static_cast<std::ptrdiff_t>(ext.size()) - maxima;
  if (maxima < 2 || minima < 2) throw NoFringesDetected("no fringe pair in window");

  struct Pair {
    double distance;
    double contrast;
  };
  std::vector<Pair> pairs;
  for (std::size_t j = 1; j + 1 < ext.size(); ++j) {
    const Extremum& left = ext[j - 1];
    const Extremum& right = ext[j + 1];
    const double w = (ext[j].x - left.x) / (right.x - left.x);
    const double opposite = left.value + w * (right.value - left.value);
    const double hi_v = ext[j].is_max ? ext[j].value : opposite;
    const double lo_v = ext[j].is_max ? opposite : ext[j].value;
    pairs.push_back({std::abs(ext[j].x - centre), (hi_v - lo_v) / (hi_v + lo_v)});
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.distance < b.distance; });
  const std::size_t used = std::min<std::size_t>(5, pairs.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < used; ++j) sum += pairs[j].contrast;
  return sum / static_cast<double>(used);
}

DualityMetrics duality_metrics(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("a must lie in [0, 1]");
  DualityMetrics m;
  m.distinguishability = (1.0 - a) / (1.0 + a);
  m.visibility = 2.0 * std::sqrt(a) / (1.0 + a);
  m.residual = m.distinguishability * m.distinguishability + m.visibility * m.visibility - 1.0;
  return m;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty data");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

namespace {

double iqr_of(std::span<const double> v) {
  std::vector<double> copy(v.begin(), v.end());
  return quantile(copy, 0.75) - quantile(copy, 0.25);
}

}  // namespace

BunchingReport bunching_metrics(std::span<const double> endpoints, std::span<const double> baseline) {
  if (endpoints.size() < 100 || baseline.size() < 100)
    throw std::invalid_argument("bunching metrics need at least 100 endpoints per set");
  BunchingReport r;
  r.count = endpoints.size();
  r.iqr = iqr_of(endpoints);
  r.baseline_iqr = iqr_of(baseline);
  r.ratio = r.iqr / r.baseline_iqr;

  // Mode from a histogram with bins of a quarter IQR.
  const auto [mn_it, mx_it] = std::minmax_element(endpoints.begin(), endpoints.end());
  const double lo = *mn_it;
  const double range = *mx_it - lo;
  const double bin = r.iqr > 0.0 ? r.iqr / 4.0 : (range > 0.0 ? range / 50.0 : 1.0);
  const std::size_t bins = static_cast<std::size_t>(range / bin) + 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double e : endpoints) {
    counts[std::min(bins - 1, static_cast<std::size_t>((e - lo) / bin))]++;
  }
  const auto best = static_cast<std::size_t>(
      std::distance(counts.begin(), std::max_element(counts.begin(), counts.end())));
  r.peak_position = lo + (static_cast<double>(best) + 0.5) * bin;
  const double band = r.iqr > 0.0 ? 0.5 * r.iqr : 0.5 * bin;
  const auto inside = std::count_if(endpoints.begin(), endpoints.end(), [&](double e) {
    return std::abs(e - r.peak_position) <= band;
  });
  r.peak_fraction = static_cast<double>(inside) / static_cast<double>(endpoints.size());
  return r;
}

std::vector<Arrival> orthogonal_arrivals(const SuperposedField& f, const EnsembleSpec& spec,
                                         double x_screen, double t_end, int threads) {
  const std::vector<Seed> seeds = seed_positions(f, spec);
  const double guard = domain_guard(f, t_end);
  std::vector<std::optional<Arrival>> hits(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      integrate_path(f, seeds[i].x0, t_end, spec.dt,
                     [&](double t0, double x0, double t1, double x1) {
                       if (!std::isfinite(x1) || std::abs(x1) > guard) return false;
                       if ((x0 - x_screen) * (x1 - x_screen) <= 0.0 && x0 != x1) {
                         const double tc = t0 + (t1 - t0) * (x_screen - x0) / (x1 - x0);
                         const double y = f.params.v_forward * tc;
                         const double angle = std::atan2(x_screen, y) * 180.0 / std::numbers::pi;
                         hits[i] = Arrival{seeds[i].origin_slit, tc, y, angle};
                         return false;
                       }
                       return true;
                     });
    }
  });
  std::vector<Arrival> out;
  for (const auto& h : hits)
    if (h) out.push_back(*h);
  return out;
}

ArrivalBand arrival_band(std::span<const Arrival> arrivals, int origin_slit) {
  std::vector<double> angles;
  for (const Arrival& a : arrivals)
    if (a.origin_slit == origin_slit) angles.push_back(a.angle_deg);
  ArrivalBand band;
  band.count = angles.size();
  if (angles.empty()) return band;
  band.median_angle_deg = quantile(angles, 0.5);
  band.width_deg = quantile(angles, 0.95) - quantile(angles, 0.05);
  return band;
}

ScreenProfile orthogonal_profile(std::span<const Arrival> arrivals, double x_screen,
                                 std::span<const double> edges, std::optional<int> origin_slit) {
  if (edges.size() < 2) throw std::invalid_argument("need at least one bin");
  ScreenProfile prof;
  prof.distance = x_screen;
  prof.orientation = Orientation::Orthogonal;
  prof.intensity.assign(edges.size() - 1, 0.0);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    prof.grid.push_back(0.5 * (edges[i] + edges[i + 1]));
  for (const Arrival& a : arrivals) {
    if (origin_slit && a.origin_slit != *origin_slit) continue;
    const auto it = std::upper_bound(edges.begin(), edges.end(), a.y);
    if (it == edges.begin() || it == edges.end()) continue;
    const auto bin = static_cast<std::size_t>(std::distance(edges.begin(), it) - 1);
    prof.intensity[bin] += 1.0;
  }
  for (std::size_t i = 0; i < prof.intensity.size(); ++i)
    prof.intensity[i] /= edges[i + 1] - edges[i];
  prof.validate();
  return prof;
}

std::vector<LogSample> log_scale(const ScreenProfile& profile, double floor_ratio) {
  profile.validate();
  const double peak = profile.intensity.empty()
                          ? 0.0
                          : *std::max_element(profile.intensity.begin(), profile.intensity.end());
  const double floor = peak * floor_ratio;
  std::vector<LogSample> out;
  out.reserve(profile.grid.size());
  for (std::size_t i = 0; i < profile.grid.size(); ++i) {
    const double v = profile.intensity[i];
    if (v < floor || !(v > 0.0)) {
      out.push_back({profile.grid[i], floor > 0.0 ? std::log10(floor) : -300.0, true});
    } else {
      out.push_back({profile.grid[i], std::log10(v), false});
    }
  }
  return out;
}

void write_log_profile_csv(std::ostream& out, const ScreenProfile& profile,
                           const ScreenProfile* initial, double floor_ratio) {
  const auto main = log_scale(profile, floor_ratio);
  std::vector<LogSample> ref;
  if (initial != nullptr) {
    if (initial->grid.size() != profile.grid.size())
      throw std::invalid_argument("reference profile must share the grid");
    ref = log_scale(*initial, floor_ratio);
  }
  out << "coordinate,log10_intensity,clamped";
  if (initial != nullptr) out << ",log10_initial,initial_clamped";
  out << '\n';
  for (std::size_t i = 0; i < main.size(); ++i) {
    out << format_double(main[i].coordinate) << ',' << format_double(main[i].log10_intensity) << ','
        << (main[i].clamped ? 1 : 0);
    if (initial != nullptr)
      out << ',' << format_double(ref[i].log10_intensity) << ',' << (ref[i].clamped ? 1 : 0);
    out << '\n';
  }
}

}  // namespace sweeper
