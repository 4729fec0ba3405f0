#pragma once

#include <filesystem>
#include <string>

#include "mechsq/protocols.hpp"

namespace mechsq::config {

// INI-style run configuration, units omega_m = 1:
//
//   [run]      setup, t_end, n_points, workers, out_dir
//   [system]   omega_m, kappa, gamma_m, n_th, g, delta, j12
//   [coupling] chi1, chi2, phi          (shorthand: derives the pumps)
//   [pump1] [pump2] ...  e1, e2, omega_mod, phi1, phi2
//   [setup2]   t_switch, t_min_multiplier, order (d1_first|d2_first), single_step
//
// Exactly one of [coupling] or [pumpN] sections must be present. Setup I
// derives two pumps from the shorthand, setup II one.

struct RunConfig {
  protocols::ProtocolRequest request;
  int workers = 1;
  /// empty: use the command-line or environment default
  std::string out_dir;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError.
RunConfig parse(const std::string& text);
RunConfig load(const std::filesystem::path& path);

/// Canonical text form; parse(to_text(c)) == c.
std::string to_text(const RunConfig& config);

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace mechsq::config
