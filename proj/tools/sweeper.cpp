// sweeper: trajectory, screen, sweep and verification jobs for attenuated
// two-slit interference.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "sweeper/commands.hpp"

int main(int argc, char** argv) {
  using namespace sweeper;

  CLI::App app{"Two-slit trajectory ensembles, screen profiles and verification"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  app.add_option("--config", config_path, "key=value run configuration")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--format", format, "table format (overrides output.format)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "ensemble seed (overrides ensemble.seed)");
  app.add_option("--threads", threads, "worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);

  auto* trajectories = app.add_subcommand("trajectories", "trajectory tables and ordering summaries");
  auto* screen = app.add_subcommand("screen", "screen intensity profiles");
  auto* sweep = app.add_subcommand("sweep", "duality, visibility and bunching per transmission factor");
  auto* verify = app.add_subcommand("verify", "oracle, continuity, duality and ordering checks");
  for (auto* sub : {trajectories, screen, sweep, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (out_dir) cfg.output_dir = *out_dir;
    if (format) cfg.format = *format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (seed) cfg.ensemble.seed = *seed;
    cfg.validate();
    if (threads == 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    if (*trajectories) return cmd_trajectories(cfg, threads, std::cout);
    if (*screen) return cmd_screen(cfg, threads, std::cout);
    if (*sweep) return cmd_sweep(cfg, threads, std::cout);
    return cmd_verify(cfg, threads, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}
