#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mechsq/config.hpp"
#include "mechsq/validation.hpp"

namespace mechsq::commands {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUnstable = 2;
inline constexpr int kExitConfig = 3;
inline constexpr int kExitRuntime = 4;

/// Directory named by MECHSQ_OUT_DIR, else "mechsq_out".
std::filesystem::path default_out_dir();

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

/// Analytic predictions only. Writes analytic.json under `out_dir`.
int cmd_analytic(const config::RunConfig& cfg, const std::filesystem::path& out_dir, Streams io);

/// Runs the configured protocol. Writes trajectory.csv and manifest.json.
int cmd_simulate(const config::RunConfig& cfg, const std::filesystem::path& out_dir, Streams io);

/// One protocol run per value of `axis`. Writes sweep.csv and sweep_manifest.json.
int cmd_sweep(const config::RunConfig& cfg, const std::string& axis, const std::vector<double>& values,
              const std::filesystem::path& out_dir, Streams io);

/// Acceptance checks. Writes validation.json when `out_dir` is non-empty.
int cmd_validate(validation::Level level, const std::filesystem::path& out_dir, Streams io);

/// "0,10,30" -> {0, 10, 30}. Throws config::ConfigError.
std::vector<double> parse_values(const std::string& list);

/// Runs `body`, mapping exceptions to exit codes and messages on io.err.
int guarded(Streams io, const std::function<int()>& body);

}  // namespace mechsq::commands
