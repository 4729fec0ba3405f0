#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mechsq/commands.hpp"

namespace cmd = mechsq::commands;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Dissipative two-mode mechanical squeezing toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MECHSQ_VERSION);

  std::string config_path, out_dir, axis, values, level = "fast";
  int workers = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (default: $MECHSQ_OUT_DIR or ./mechsq_out)");
  };
  auto* analytic = app.add_subcommand("analytic", "analytic predictions, no simulation");
  add_common(analytic);
  auto* simulate = app.add_subcommand("simulate", "run the configured protocol");
  add_common(simulate);
  auto* sweep = app.add_subcommand("sweep", "run the protocol over a list of parameter values");
  add_common(sweep);
  sweep->add_option("--axis", axis, "parameter name (kappa, gamma_m, n_th, chi1, ...)")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();
  sweep->add_option("--workers", workers, "concurrent rows (overrides run.workers)")->check(CLI::PositiveNumber);
  auto* validate = app.add_subcommand("validate", "run the acceptance checks");
  validate->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  validate->add_option("--out", out_dir, "also write validation.json here");

  CLI11_PARSE(app, argc, argv);

  const cmd::Streams io{std::cout, std::cerr};
  return cmd::guarded(io, [&]() -> int {
    if (validate->parsed()) return cmd::cmd_validate(mechsq::validation::parse_level(level), out_dir, io);

    auto cfg = mechsq::config::load(config_path);
    const fs::path out = !out_dir.empty() ? fs::path(out_dir)
                         : !cfg.out_dir.empty() ? fs::path(cfg.out_dir)
                                                : cmd::default_out_dir();
    if (analytic->parsed()) return cmd::cmd_analytic(cfg, out, io);
    if (simulate->parsed()) return cmd::cmd_simulate(cfg, out, io);
    if (workers > 0) cfg.workers = workers;
    return cmd::cmd_sweep(cfg, axis, cmd::parse_values(values), out, io);
  });
}
