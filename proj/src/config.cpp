#include "mechsq/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace mechsq::config {

namespace {

using boost::property_tree::ptree;

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"run", {"setup", "t_end", "n_points", "workers", "out_dir"}},
    {"system", {"omega_m", "kappa", "gamma_m", "n_th", "g", "delta", "j12"}},
    {"coupling", {"chi1", "chi2", "phi"}},
    {"setup2", {"t_switch", "t_min_multiplier", "order", "single_step"}},
    {"pump", {"e1", "e2", "omega_mod", "phi1", "phi2"}},
};

bool is_pump_section(const std::string& name) {
  return name.size() > 4 && name.rfind("pump", 0) == 0 &&
         name.find_first_not_of("0123456789", 4) == std::string::npos;
}

template <class T>
T read(const ptree& section, const std::string& where, const std::string& key, T fallback) {
  const auto node = section.get_child_optional(key);
  if (!node) return fallback;
  const auto value = node->get_value_optional<T>();
  if (!value) throw ConfigError(where + "." + key + ": cannot parse '" + node->data() + "'");
  return *value;
}

template <class T>
T require(const ptree& section, const std::string& where, const std::string& key) {
  if (!section.get_child_optional(key)) throw ConfigError("missing required key " + where + "." + key);
  return read<T>(section, where, key, T{});
}

bool read_bool(const ptree& section, const std::string& where, const std::string& key, bool fallback) {
  const auto node = section.get_child_optional(key);
  if (!node) return fallback;
  const std::string v = node->data();
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + "." + key + ": expected a boolean, got '" + v + "'");
}

void check_keys(const ptree& tree) {
  for (const auto& [name, section] : tree) {
    if (!section.data().empty()) throw ConfigError("key '" + name + "' outside any section");
    const std::string kind = is_pump_section(name) ? "pump" : name;
    const auto known = kKnownKeys.find(kind);
    if (known == kKnownKeys.end()) throw ConfigError("unknown section [" + name + "]");
    for (const auto& [key, value] : section) {
      if (!known->second.count(key)) throw ConfigError("unknown key " + name + "." + key);
    }
  }
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

RunConfig parse(const std::string& text) {
  ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  check_keys(tree);

  RunConfig cfg;
  auto& req = cfg.request;
  const ptree empty;
  const ptree& run = tree.get_child("run", empty);
  const ptree& sys = tree.get_child("system", empty);

  if (!run.get_child_optional("setup")) throw ConfigError("missing required key run.setup");
  try {
    req.setup = protocols::parse_setup(run.get<std::string>("setup"));
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  req.t_end = read(run, "run", "t_end", req.t_end);
  req.n_points = read(run, "run", "n_points", req.n_points);
  cfg.workers = read(run, "run", "workers", cfg.workers);
  cfg.out_dir = read<std::string>(run, "run", "out_dir", "");
  if (req.n_points < 1) throw ConfigError("run.n_points must be >= 1");
  if (!(req.t_end > 0.0)) throw ConfigError("run.t_end must be > 0");
  if (cfg.workers < 1) throw ConfigError("run.workers must be >= 1");

  auto& p = req.params;
  p.omega_m = read(sys, "system", "omega_m", p.omega_m);
  p.kappa = require<double>(sys, "system", "kappa");
  p.gamma_m = read(sys, "system", "gamma_m", p.gamma_m);
  p.n_th = read(sys, "system", "n_th", p.n_th);
  p.g = read(sys, "system", "g", p.g);
  p.delta = read(sys, "system", "delta", p.omega_m);
  const bool setup2 = req.setup == protocols::Setup::setup2;
  p.j12 = setup2 ? require<double>(sys, "system", "j12") : read(sys, "system", "j12", 0.0);

  std::vector<std::string> pump_sections;
  for (const auto& [name, section] : tree) {
    if (is_pump_section(name)) pump_sections.push_back(name);
  }
  std::sort(pump_sections.begin(), pump_sections.end(), [](const std::string& a, const std::string& b) {
    return std::stoi(a.substr(4)) < std::stoi(b.substr(4));
  });
  const auto coupling = tree.get_child_optional("coupling");
  if (coupling && !pump_sections.empty()) throw ConfigError("give either [coupling] or [pumpN] sections, not both");
  if (coupling) {
    const double chi1 = require<double>(*coupling, "coupling", "chi1");
    const double chi2 = require<double>(*coupling, "coupling", "chi2");
    const double phi = read(*coupling, "coupling", "phi", 0.0);
    try {
      p.pump = protocols::setup1_drives(p.g, chi1, chi2, phi, p.kappa, p.omega_m);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
    if (setup2) p.pump.resize(1);
  } else {
    for (const auto& name : pump_sections) {
      const ptree& s = tree.get_child(name);
      DriveSpec d;
      d.e1 = require<double>(s, name, "e1");
      d.e2 = require<double>(s, name, "e2");
      d.omega_mod = read(s, name, "omega_mod", 2.0 * p.omega_m);
      d.phi1 = read(s, name, "phi1", 0.0);
      d.phi2 = read(s, name, "phi2", 0.0);
      p.pump.push_back(d);
    }
  }
  const std::size_t pumps_needed = setup2 ? 1 : 2;
  if (p.pump.size() != pumps_needed) {
    throw ConfigError(protocols::to_string(req.setup) + " needs " + std::to_string(pumps_needed) +
                      " pump section(s) or a [coupling] section");
  }

  if (const auto s2 = tree.get_child_optional("setup2")) {
    if (!setup2) throw ConfigError("[setup2] section given for " + protocols::to_string(req.setup));
    req.t_switch = read(*s2, "setup2", "t_switch", req.t_switch);
    req.t_min_multiplier = read(*s2, "setup2", "t_min_multiplier", req.t_min_multiplier);
    req.single_step = read_bool(*s2, "setup2", "single_step", req.single_step);
    const std::string order = read<std::string>(*s2, "setup2", "order", "d1_first");
    if (order == "d1_first") {
      req.order = protocols::StepOrder::d1_first;
    } else if (order == "d2_first") {
      req.order = protocols::StepOrder::d2_first;
    } else {
      throw ConfigError("setup2.order must be d1_first or d2_first");
    }
  }
  try {
    p.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string to_text(const RunConfig& config) {
  const auto& req = config.request;
  const auto& p = req.params;
  std::ostringstream out;
  out << "[run]\n"
      << "setup = " << protocols::to_string(req.setup) << "\n"
      << "t_end = " << fmt(req.t_end) << "\n"
      << "n_points = " << req.n_points << "\n"
      << "workers = " << config.workers << "\n";
  if (!config.out_dir.empty()) out << "out_dir = " << config.out_dir << "\n";
  out << "\n[system]\n"
      << "omega_m = " << fmt(p.omega_m) << "\n"
      << "kappa = " << fmt(p.kappa) << "\n"
      << "gamma_m = " << fmt(p.gamma_m) << "\n"
      << "n_th = " << fmt(p.n_th) << "\n"
      << "g = " << fmt(p.g) << "\n"
      << "delta = " << fmt(p.delta) << "\n"
      << "j12 = " << fmt(p.j12) << "\n";
  for (std::size_t k = 0; k < p.pump.size(); ++k) {
    const auto& d = p.pump[k];
    out << "\n[pump" << k + 1 << "]\n"
        << "e1 = " << fmt(d.e1) << "\n"
        << "e2 = " << fmt(d.e2) << "\n"
        << "omega_mod = " << fmt(d.omega_mod) << "\n"
        << "phi1 = " << fmt(d.phi1) << "\n"
        << "phi2 = " << fmt(d.phi2) << "\n";
  }
  if (req.setup == protocols::Setup::setup2) {
    out << "\n[setup2]\n"
        << "t_switch = " << fmt(req.t_switch) << "\n"
        << "t_min_multiplier = " << fmt(req.t_min_multiplier) << "\n"
        << "order = " << (req.order == protocols::StepOrder::d1_first ? "d1_first" : "d2_first") << "\n"
        << "single_step = " << (req.single_step ? "true" : "false") << "\n";
  }
  return out.str();
}

}  // namespace mechsq::config
