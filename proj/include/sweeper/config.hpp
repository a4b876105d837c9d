#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sweeper/screen.hpp"
#include "sweeper/superposition.hpp"
#include "sweeper/trajectories.hpp"

namespace sweeper {

// Rejected configuration; `path()` names the offending dotted key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Unreadable input or unwritable output.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AttenuationMode { Stochastic, Chopper };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Orientation o);
std::string_view to_string(Scale s);
std::string_view to_string(AttenuationMode m);
std::string_view to_string(OutputFormat f);

struct ScreenSpec {
  double distance = 5.0;  // forward: L; orthogonal: transverse offset of the line
  Orientation orientation = Orientation::Forward;
  double grid_min = -150.0;
  double grid_max = 250.0;
  std::size_t points = 8001;
  Scale scale = Scale::Linear;
  AttenuationMode attenuation_mode = AttenuationMode::Stochastic;
  double zoom = 1000.0;
  double visibility_distance = 62.5;
  double visibility_periods = 3.5;  // half-width of the visibility window
};

struct SweepSpec {
  std::vector<double> a_list;
  double onset_ratio = 0.25;
};

struct RunConfig {
  PhysicalParams physics{1.0, 1.0, 0.15625};
  double sigma0 = 1.0;
  double half_separation = 16.0;
  std::vector<double> attenuation{1e-4};
  CoherenceMode coherence{};
  double density_floor = kDefaultDensityFloor;
  EnsembleSpec ensemble{};
  ScreenSpec screen{};
  SweepSpec sweep{};
  std::string output_dir = "out";
  OutputFormat format = OutputFormat::Csv;
  bool zero_sin_term = false;

  // Throws ConfigError naming the first invalid key.
  void validate() const;

  SuperposedField field(double a) const;
  SuperposedField field(double a, CoherenceMode mode) const;

  // Sorted key=value lines of every setting that affects results
  // (output.dir excluded). Numbers use shortest round-trip formatting.
  std::string canonical_text() const;
  std::uint64_t hash() const;  // FNV-1a over canonical_text()
  std::string hash_hex() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace sweeper
