#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mechsq/commands.hpp"

using namespace mechsq;
namespace cmd = mechsq::commands;
namespace fs = std::filesystem;

namespace {

const char* kConfig = R"([run]
setup = setup1_rwa
t_end = 2000
n_points = 5

[system]
kappa = 0.05
gamma_m = 1e-4
g = 1e-4

[coupling]
chi1 = 0.01
chi2 = 0.03
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mechsq_cmd_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string with_chi1(double chi1) {
  std::string text = kConfig;
  text.replace(text.find("chi1 = 0.01"), 11, "chi1 = " + std::to_string(chi1));
  return text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("parse_values") {
  CHECK(cmd::parse_values("0, 10,30") == std::vector<double>{0.0, 10.0, 30.0});
  CHECK(cmd::parse_values("1e-4") == std::vector<double>{1e-4});
  CHECK(cmd::parse_values("").empty());
  CHECK_THROWS_AS(cmd::parse_values("1,x"), config::ConfigError);
  CHECK_THROWS_AS(cmd::parse_values("2.5abc"), config::ConfigError);
}

TEST_CASE("guarded maps errors to exit codes") {
  std::ostringstream out, err;
  const cmd::Streams io{out, err};
  CHECK(cmd::guarded(io, [] { return cmd::kExitOk; }) == cmd::kExitOk);
  CHECK(cmd::guarded(io, []() -> int { throw StabilityError("stability violated: x"); }) == cmd::kExitUnstable);
  CHECK(cmd::guarded(io, []() -> int { throw config::ConfigError("bad"); }) == cmd::kExitConfig);
  CHECK(cmd::guarded(io, []() -> int { throw PreconditionError("bad"); }) == cmd::kExitConfig);
  CHECK(cmd::guarded(io, []() -> int { throw IntegrationError("diverged", 1.0); }) == cmd::kExitRuntime);
  CHECK(err.str().find("stability violated") != std::string::npos);
}

TEST_CASE("simulate writes a reproducible trajectory and manifest") {
  const auto cfg = config::parse(kConfig);
  std::ostringstream out, err;
  const auto dir = scratch("simulate");
  REQUIRE(cmd::cmd_simulate(cfg, dir, {out, err}) == cmd::kExitOk);
  const std::string csv = slurp(dir / "trajectory.csv");
  const auto lines = lines_of(csv);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "t,epr_min,n_c1,n_c2,re_c1c2,im_c1c2,purity");
  const double last_epr = std::stod(lines.back().substr(lines.back().find(',') + 1));
  CHECK(last_epr == doctest::Approx(1.0035).epsilon(1e-3));

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  for (const char* key : {"toolkit", "version", "command", "config_text", "config", "prediction", "metrics",
                          "schedule", "warnings", "regime", "outputs"}) {
    CHECK_MESSAGE(manifest.contains(key), key);
  }
  CHECK(config::parse(manifest["config_text"].get<std::string>()) == cfg);

  const auto again = scratch("simulate_again");
  REQUIRE(cmd::cmd_simulate(cfg, again, {out, err}) == cmd::kExitOk);
  CHECK(slurp(again / "trajectory.csv") == csv);
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST_CASE("analytic") {
  std::ostringstream out, err;
  const auto dir = scratch("analytic");
  SUBCASE("no squeezing without the modulated tone") {
    REQUIRE(cmd::cmd_analytic(config::parse(with_chi1(0.0)), dir, {out, err}) == cmd::kExitOk);
    const auto j = nlohmann::json::parse(slurp(dir / "analytic.json"));
    CHECK(j["prediction"]["r"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(j["prediction"]["epr_min"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("unstable couplings") {
    const int code = cmd::guarded({out, err}, [&] { return cmd::cmd_analytic(config::parse(with_chi1(0.04)), dir, {out, err}); });
    CHECK(code == cmd::kExitUnstable);
    CHECK(err.str().find("stability violated") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("sweep rows") {
  auto cfg = config::parse(kConfig);
  std::ostringstream out, err;
  const auto dir = scratch("sweep");
  REQUIRE(cmd::cmd_sweep(cfg, "chi1", {0.01, 0.05}, dir, {out, err}) == cmd::kExitOk);
  const auto lines = lines_of(slurp(dir / "sweep.csv"));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "chi1,status,epr_min,predicted_epr_min,n_c1,message");
  CHECK(lines[1].find(",ok,") != std::string::npos);
  CHECK(lines[2].find(",unstable,") != std::string::npos);
  CHECK(fs::exists(dir / "sweep_manifest.json"));

  const auto sim_dir = scratch("sweep_sim");
  REQUIRE(cmd::cmd_simulate(cfg, sim_dir, {out, err}) == cmd::kExitOk);
  const auto sim = lines_of(slurp(sim_dir / "trajectory.csv"));
  const std::string sim_epr = sim.back().substr(sim.back().find(',') + 1, sim.back().find(',', sim.back().find(',') + 1) - sim.back().find(',') - 1);
  CHECK(lines[1].find(",ok," + sim_epr + ",") != std::string::npos);
  fs::remove_all(dir);
  fs::remove_all(sim_dir);
}

TEST_CASE("default output directory follows the environment") {
  ::setenv("MECHSQ_OUT_DIR", "/tmp/somewhere", 1);
  CHECK(cmd::default_out_dir() == fs::path("/tmp/somewhere"));
  ::unsetenv("MECHSQ_OUT_DIR");
  CHECK(cmd::default_out_dir() == fs::path("mechsq_out"));
}

TEST_CASE("command-line executable") {
  const std::string cli = MECHSQ_CLI_PATH;
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  auto exit_code = [](const std::string& command) {
    const int status = std::system((command + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  const auto good = write("good.ini", kConfig);
  const auto unstable = write("unstable.ini", with_chi1(0.04));
  const auto broken = write("broken.ini", "[run]\nsetup = setup1_rwa\n");
  const std::string out = " --out " + (dir / "out").string();

  CHECK(exit_code(cli + " analytic --config " + good + out) == cmd::kExitOk);
  CHECK(fs::exists(dir / "out" / "analytic.json"));
  CHECK(exit_code(cli + " analytic --config " + unstable + out) == cmd::kExitUnstable);
  CHECK(exit_code(cli + " simulate --config " + broken + out) == cmd::kExitConfig);
  CHECK(exit_code(cli + " sweep --config " + good + " --axis n_th --values 0,1" + out) == cmd::kExitOk);
  CHECK(fs::exists(dir / "out" / "sweep.csv"));
  CHECK(exit_code(cli + " --version") == 0);
  CHECK(exit_code(cli) != 0);
  fs::remove_all(dir);
}
