#include "sweeper/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sweeper/csv.hpp"

namespace sweeper {

std::string_view to_string(Orientation o) { return o == Orientation::Forward ? "forward" : "orthogonal"; }
std::string_view to_string(Scale s) { return s == Scale::Linear ? "linear" : "log"; }
std::string_view to_string(AttenuationMode m) {
  return m == AttenuationMode::Stochastic ? "stochastic" : "chopper";
}
std::string_view to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
    throw ConfigError(key, "expected a finite number, got '" + std::string(text) + "'");
  return value;
}

template <typename Int>
Int parse_int(const std::string& key, std::string_view text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(key, "expected an integer, got '" + std::string(text) + "'");
  return value;
}

std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_double(key, trim(text.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

bool parse_bool(const std::string& key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(text) + "'");
}

template <typename Enum>
Enum parse_choice(const std::string& key, std::string_view text,
                  std::initializer_list<std::pair<std::string_view, Enum>> choices) {
  std::string names;
  for (const auto& [name, value] : choices) {
    if (name == text) return value;
    names += names.empty() ? std::string(name) : "|" + std::string(name);
  }
  throw ConfigError(key, "expected one of " + names + ", got '" + std::string(text) + "'");
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

struct Key {
  std::function<void(RunConfig&, const std::string&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
  bool hashed = true;
  bool may_be_empty = false;
};

#define SWEEPER_DOUBLE(member)                                                              \
  Key {                                                                                     \
    [](RunConfig& c, const std::string& k, std::string_view v) { c.member = parse_double(k, v); }, \
        [](const RunConfig& c) { return format_double(c.member); }                          \
  }

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = {
      {"physics.hbar", SWEEPER_DOUBLE(physics.hbar)},
      {"physics.mass", SWEEPER_DOUBLE(physics.mass)},
      {"physics.v_forward", SWEEPER_DOUBLE(physics.v_forward)},
      {"channel.sigma0", SWEEPER_DOUBLE(sigma0)},
      {"channel.half_separation", SWEEPER_DOUBLE(half_separation)},
      {"attenuation.a",
       {[](RunConfig& c, const std::string& k, std::string_view v) { c.attenuation = parse_list(k, v); },
        [](const RunConfig& c) { return format_list(c.attenuation); }}},
      {"coherence.mode",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          try {
            c.coherence.kind = parse_coherence_kind(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(k, e.what());
          }
        },
        [](const RunConfig& c) { return std::string(to_string(c.coherence.kind)); }}},
      {"coherence.extra_phase", SWEEPER_DOUBLE(coherence.extra_phase)},
      {"field.density_floor", SWEEPER_DOUBLE(density_floor)},
      {"ensemble.n_per_slit",
       {[](RunConfig& c, const std::string& k, std::string_view v) { c.ensemble.n_per_slit = parse_int<int>(k, v); },
        [](const RunConfig& c) { return std::to_string(c.ensemble.n_per_slit); }}},
      {"ensemble.seeding",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.ensemble.seeding = parse_choice<Seeding>(
              k, v, {{"equal_count", Seeding::EqualCount}, {"density_weighted", Seeding::DensityWeighted}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.ensemble.seeding)); }}},
      {"ensemble.span", SWEEPER_DOUBLE(ensemble.span)},
      {"ensemble.seed",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.ensemble.seed = parse_int<std::uint64_t>(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.ensemble.seed); }}},
      {"ensemble.t_end", SWEEPER_DOUBLE(ensemble.t_end)},
      {"ensemble.dt", SWEEPER_DOUBLE(ensemble.dt)},
      {"ensemble.record_stride",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.ensemble.record_stride = parse_int<int>(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.ensemble.record_stride); }}},
      {"screen.distance", SWEEPER_DOUBLE(screen.distance)},
      {"screen.orientation",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.screen.orientation = parse_choice<Orientation>(
              k, v, {{"forward", Orientation::Forward}, {"orthogonal", Orientation::Orthogonal}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.screen.orientation)); }}},
      {"screen.grid_min", SWEEPER_DOUBLE(screen.grid_min)},
      {"screen.grid_max", SWEEPER_DOUBLE(screen.grid_max)},
      {"screen.points",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.screen.points = parse_int<std::size_t>(k, v);
        },
        [](const RunConfig& c) { return std::to_string(c.screen.points); }}},
      {"screen.scale",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.screen.scale = parse_choice<Scale>(k, v, {{"linear", Scale::Linear}, {"log", Scale::Log}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.screen.scale)); }}},
      {"screen.attenuation_mode",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.screen.attenuation_mode = parse_choice<AttenuationMode>(
              k, v, {{"stochastic", AttenuationMode::Stochastic}, {"chopper", AttenuationMode::Chopper}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.screen.attenuation_mode)); }}},
      {"screen.zoom", SWEEPER_DOUBLE(screen.zoom)},
      {"screen.visibility_distance", SWEEPER_DOUBLE(screen.visibility_distance)},
      {"screen.visibility_periods", SWEEPER_DOUBLE(screen.visibility_periods)},
      {"sweep.a_list",
       {[](RunConfig& c, const std::string& k, std::string_view v) { c.sweep.a_list = parse_list(k, v); },
        [](const RunConfig& c) { return format_list(c.sweep.a_list); }, true, true}},
      {"sweep.onset_ratio", SWEEPER_DOUBLE(sweep.onset_ratio)},
      {"output.dir",
       {[](RunConfig& c, const std::string&, std::string_view v) { c.output_dir = std::string(v); },
        [](const RunConfig& c) { return c.output_dir; }, false}},
      {"output.format",
       {[](RunConfig& c, const std::string& k, std::string_view v) {
          c.format = parse_choice<OutputFormat>(k, v, {{"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}});
        },
        [](const RunConfig& c) { return std::string(to_string(c.format)); }}},
      {"debug.zero_sin_term",
       {[](RunConfig& c, const std::string& k, std::string_view v) { c.zero_sin_term = parse_bool(k, v); },
        [](const RunConfig& c) { return std::string(c.zero_sin_term ? "true" : "false"); }}},
  };
  return table;
}

#undef SWEEPER_DOUBLE

void require(bool ok, const char* key, const char* message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

void RunConfig::validate() const {
  require(physics.hbar > 0.0, "physics.hbar", "must be > 0");
  require(physics.mass > 0.0, "physics.mass", "must be > 0");
  require(physics.v_forward > 0.0, "physics.v_forward", "must be > 0");
  require(sigma0 > 0.0, "channel.sigma0", "must be > 0");
  require(half_separation > 0.0, "channel.half_separation", "must be > 0");
  require(!attenuation.empty(), "attenuation.a", "needs at least one value");
  for (double a : attenuation) require(a >= 0.0 && a <= 1.0, "attenuation.a", "values must lie in [0, 1]");
  require(density_floor >= 0.0, "field.density_floor", "must be >= 0");
  require(ensemble.n_per_slit > 0, "ensemble.n_per_slit", "must be > 0");
  require(ensemble.span > 0.0, "ensemble.span", "must be > 0");
  require(ensemble.t_end > 0.0, "ensemble.t_end", "must be > 0");
  require(ensemble.dt > 0.0 && ensemble.dt <= ensemble.t_end, "ensemble.dt", "must lie in (0, t_end]");
  require(ensemble.record_stride > 0, "ensemble.record_stride", "must be > 0");
  require(screen.distance > 0.0, "screen.distance", "must be > 0");
  require(screen.grid_max > screen.grid_min, "screen.grid_max", "must exceed screen.grid_min");
  require(screen.points >= 2, "screen.points", "must be >= 2");
  require(screen.zoom >= 1.0, "screen.zoom", "must be >= 1");
  require(screen.visibility_distance > 0.0, "screen.visibility_distance", "must be > 0");
  require(screen.visibility_periods > 0.0, "screen.visibility_periods", "must be > 0");
  for (double a : sweep.a_list) require(a >= 0.0 && a <= 1.0, "sweep.a_list", "values must lie in [0, 1]");
  require(sweep.onset_ratio > 0.0, "sweep.onset_ratio", "must be > 0");
  require(!output_dir.empty(), "output.dir", "must not be empty");
}

SuperposedField RunConfig::field(double a) const { return field(a, coherence); }

SuperposedField RunConfig::field(double a, CoherenceMode mode) const {
  SuperposedField f = SuperposedField::symmetric(physics, half_separation, sigma0, a, mode);
  f.density_floor = density_floor;
  f.zero_sin_term = zero_sin_term;
  return f;
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& [key, k] : keys()) {
    if (!k.hashed) continue;
    out += key + "=" + k.get(*this) + "\n";
  }
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_text()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  const auto [ptr, ec] = std::to_chars(buf, buf + 16, hash(), 16);
  std::string hex(buf, ptr);
  return std::string(16 - hex.size(), '0') + hex;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = keys().find(key);
    if (it == keys().end()) throw ConfigError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    if (value.empty() && !it->second.may_be_empty) throw ConfigError(key, "missing value");
    it->second.set(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace sweeper
