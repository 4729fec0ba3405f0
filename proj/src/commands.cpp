#include "mechsq/commands.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mechsq/analytics.hpp"
#include "mechsq/meanfield.hpp"

namespace mechsq::commands {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream out;
  out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json prediction_json(const analytics::AnalyticPrediction& p) {
  json j = {
      {"r", p.r},
      {"G", p.G},
      {"d0", p.d0},
      {"d0_approx", p.d0_approx},
      {"occupation", p.occupation},
      {"cross", complex_json(p.cross)},
      {"epr_min", p.epr_min},
      {"nth_max", optional_json(p.nth_max)},
      {"nth_max_approx", optional_json(p.nth_max_approx)},
      {"t_min", {{"value", p.t_min.value}, {"extrapolated", p.t_min.extrapolated}}},
      {"eta_plus", complex_json(p.eigen.first)},
      {"eta_minus", complex_json(p.eigen.second)},
  };
  if (p.setup2) {
    j["setup2"] = {
        {"r_tilde", p.setup2->r_tilde},         {"n_bar2", p.setup2->n_bar2},
        {"xi2", complex_json(p.setup2->xi2)},   {"epr_min_inf", p.setup2->epr_min_inf},
        {"nth_max", p.setup2->nth_max},
    };
  }
  return j;
}

json drive_json(const DriveSpec& d) {
  return {{"e1", d.e1}, {"e2", d.e2}, {"omega_mod", d.omega_mod}, {"phi1", d.phi1}, {"phi2", d.phi2}};
}

json config_json(const config::RunConfig& cfg) {
  const auto& req = cfg.request;
  const auto& p = req.params;
  json pumps = json::array();
  for (const auto& d : p.pump) pumps.push_back(drive_json(d));
  return {
      {"setup", protocols::to_string(req.setup)},
      {"t_end", req.t_end},
      {"n_points", req.n_points},
      {"workers", cfg.workers},
      {"system",
       {{"omega_m", p.omega_m},
        {"kappa", p.kappa},
        {"gamma_m", p.gamma_m},
        {"n_th", p.n_th},
        {"g", p.g},
        {"delta", p.delta},
        {"j12", p.j12}}},
      {"pumps", pumps},
      {"setup2",
       {{"t_switch", req.t_switch},
        {"t_min_multiplier", req.t_min_multiplier},
        {"order", req.order == protocols::StepOrder::d1_first ? "d1_first" : "d2_first"},
        {"single_step", req.single_step}}},
  };
}

json manifest_base(const std::string& command, const config::RunConfig& cfg, const std::string& started) {
  return {
      {"toolkit", "mechsq"},
      {"version", MECHSQ_VERSION},
      {"command", command},
      {"config_text", config::to_text(cfg)},
      {"config", config_json(cfg)},
      {"timestamps", {{"started", started}}},
  };
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_manifest(const fs::path& path, json manifest) {
  manifest["timestamps"]["finished"] = timestamp();
  write_text(path, manifest.dump(2) + "\n");
}

std::string num(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c == '\n' ? ' ' : c;
  }
  return quoted + "\"";
}

/// Effective couplings of the first pump.
CouplingProfile first_coupling(const SystemParams& p) {
  if (p.pump.empty()) throw PreconditionError("config has no pump");
  return meanfield::chi_from_drive(p.g, p.pump[0], p.kappa, p.omega_m);
}

/// Figure of merit the run should be compared with.
double predicted_epr(const config::RunConfig& cfg, const protocols::ProtocolResult& res) {
  const auto& req = cfg.request;
  if (req.setup == protocols::Setup::setup2 && req.single_step && res.prediction.setup2) {
    return res.prediction.setup2->epr_min_inf;
  }
  return res.prediction.epr_min;
}

}  // namespace

fs::path default_out_dir() {
  if (const char* env = std::getenv("MECHSQ_OUT_DIR"); env && *env) return env;
  return "mechsq_out";
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    item = item.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw config::ConfigError("not a number in value list: '" + item + "'");
    values.push_back(v);
  }
  return values;
}

int guarded(Streams io, const std::function<int()>& body) {
  try {
    return body();
  } catch (const StabilityError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitUnstable;
  } catch (const config::ConfigError& e) {
    io.err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_analytic(const config::RunConfig& cfg, const fs::path& out_dir, Streams io) {
  const std::string started = timestamp();
  const auto& p = cfg.request.params;
  const auto chi = first_coupling(p);
  const bool setup2 = cfg.request.setup == protocols::Setup::setup2;
  const auto pred = analytics::predict(chi.chi1, chi.chi2, chi.phi, p.kappa, p.gamma_m, p.n_th, setup2);

  auto row = [&](const std::string& name, const std::string& value) {
    io.out << std::left << std::setw(18) << name << value << "\n";
  };
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string("unbounded"); };
  auto cplx = [](Complex z) { return num(z.real()) + (z.imag() < 0 ? " - " : " + ") + num(std::abs(z.imag())) + "i"; };
  row("chi1", num(chi.chi1));
  row("chi2", num(chi.chi2));
  row("r", num(pred.r));
  row("G", num(pred.G));
  row("d0", num(pred.d0));
  row("d0_approx", num(pred.d0_approx));
  row("occupation", num(pred.occupation));
  row("cross", cplx(pred.cross));
  row("epr_min", num(pred.epr_min));
  row("nth_max", opt(pred.nth_max));
  row("nth_max_approx", opt(pred.nth_max_approx));
  row("t_min", num(pred.t_min.value) + (pred.t_min.extrapolated ? " (extrapolated)" : ""));
  row("eta_plus", cplx(pred.eigen.first));
  row("eta_minus", cplx(pred.eigen.second));
  if (pred.setup2) {
    row("r_tilde", num(pred.setup2->r_tilde));
    row("n_bar2", num(pred.setup2->n_bar2));
    row("epr_min_inf", num(pred.setup2->epr_min_inf));
    row("nth_max_setup2", num(pred.setup2->nth_max));
  }

  json manifest = manifest_base("analytic", cfg, started);
  manifest["prediction"] = prediction_json(pred);
  write_manifest(out_dir / "analytic.json", manifest);
  return kExitOk;
}

int cmd_simulate(const config::RunConfig& cfg, const fs::path& out_dir, Streams io) {
  const std::string started = timestamp();
  const auto res = protocols::run(cfg.request);

  std::ostringstream csv;
  csv << "t,epr_min,n_c1,n_c2,re_c1c2,im_c1c2,purity\n";
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    csv << num(res.times[i]) << ',' << num(res.epr_min_series[i]) << ',' << num(res.occupations[i][0]) << ','
        << num(res.occupations[i][1]) << ',' << num(res.cross_moment[i].real()) << ','
        << num(res.cross_moment[i].imag()) << ',' << num(res.purity_series[i]) << '\n';
  }
  write_text(out_dir / "trajectory.csv", csv.str());

  const double final_epr = res.final_epr_min();
  const double predicted = predicted_epr(cfg, res);
  json metrics = {
      {"final_epr_min", final_epr},
      {"predicted_epr_min", predicted},
      {"deviation", final_epr - predicted},
      {"final_purity", res.purity_series.back()},
      {"final_occupations", {res.occupations.back()[0], res.occupations.back()[1]}},
      {"late_time_epr_average", optional_json(res.late_time_epr_average)},
      {"rwa_epr_min", optional_json(res.rwa_epr_min)},
  };
  json schedule = json::array();
  for (const auto& s : res.schedule) {
    schedule.push_back({{"t_start", s.t_start},
                        {"drive", drive_json(s.drive)},
                        {"chi1", s.coupling.chi1},
                        {"chi2", s.coupling.chi2},
                        {"phi", s.coupling.phi},
                        {"detuning", s.detuning}});
  }
  json manifest = manifest_base("simulate", cfg, started);
  manifest["prediction"] = prediction_json(res.prediction);
  manifest["metrics"] = metrics;
  manifest["schedule"] = schedule;
  manifest["diagnostics"] = res.diagnostics;
  manifest["warnings"] = res.warnings;
  manifest["regime"] = res.regime;
  manifest["outputs"] = {{"trajectory", "trajectory.csv"}};
  write_manifest(out_dir / "manifest.json", manifest);

  for (const auto& w : res.warnings) io.err << "warning: " << w << "\n";
  io.out << "setup " << protocols::to_string(cfg.request.setup) << ": final epr_min " << num(final_epr)
         << " (predicted " << num(predicted) << ")\n"
         << "wrote " << (out_dir / "trajectory.csv").string() << "\n";
  return kExitOk;
}

int cmd_sweep(const config::RunConfig& cfg, const std::string& axis, const std::vector<double>& values,
              const fs::path& out_dir, Streams io) {
  const std::string started = timestamp();
  const auto rows = protocols::sweep(cfg.request, axis, values, cfg.workers);

  std::ostringstream csv;
  csv << axis << ",status,epr_min,predicted_epr_min,n_c1,message\n";
  json table = json::array();
  int failed = 0;
  for (const auto& r : rows) {
    const bool ok = r.status == "ok";
    failed += ok ? 0 : 1;
    csv << num(r.value) << ',' << r.status << ',' << (ok ? num(r.epr_min) : "") << ','
        << (ok ? num(r.predicted_epr_min) : "") << ',' << (ok ? num(r.occupation) : "") << ','
        << csv_field(r.message) << '\n';
    table.push_back({{"value", r.value}, {"status", r.status}, {"message", r.message}});
    if (ok) {
      table.back()["epr_min"] = r.epr_min;
      table.back()["predicted_epr_min"] = r.predicted_epr_min;
    }
  }
  write_text(out_dir / "sweep.csv", csv.str());
  json manifest = manifest_base("sweep", cfg, started);
  manifest["axis"] = axis;
  manifest["values"] = values;
  manifest["rows"] = table;
  manifest["outputs"] = {{"table", "sweep.csv"}};
  write_manifest(out_dir / "sweep_manifest.json", manifest);
  io.out << rows.size() << " rows (" << failed << " failed), wrote " << (out_dir / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_validate(validation::Level level, const fs::path& out_dir, Streams io) {
  const std::string started = timestamp();
  json checks = json::array();
  bool all = true;
  validation::run_checks(level, [&](const validation::CheckResult& r) {
    io.out << r.summary() << std::endl;
    all = all && r.passed();
    json m = json::array();
    for (const auto& x : r.measurements) {
      m.push_back({{"label", x.label}, {"measured", x.measured}, {"tolerance", x.tolerance}, {"passed", x.passed}});
    }
    checks.push_back({{"criterion", r.criterion},
                      {"name", r.name},
                      {"passed", r.passed()},
                      {"skipped", r.measurements.empty() && r.error.empty()},
                      {"measurements", m},
                      {"error", r.error},
                      {"note", r.note},
                      {"seconds", r.seconds}});
  });
  io.out << (all ? "all checks passed" : "some checks FAILED") << " (level " << validation::to_string(level)
         << ")\n";
  if (!out_dir.empty()) {
    json manifest = {{"toolkit", "mechsq"},
                     {"version", MECHSQ_VERSION},
                     {"command", "validate"},
                     {"level", validation::to_string(level)},
                     {"passed", all},
                     {"checks", checks},
                     {"timestamps", {{"started", started}}}};
    write_manifest(out_dir / "validation.json", manifest);
  }
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace mechsq::commands
