#include "mechsq/protocols.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "mechsq/meanfield.hpp"

namespace mechsq::protocols {

std::string to_string(Setup setup) {
  switch (setup) {
    case Setup::setup1_rwa:
      return "setup1_rwa";
    case Setup::setup1_full:
      return "setup1_full";
    case Setup::setup2:
      return "setup2";
  }
  return "unknown";
}

Setup parse_setup(const std::string& name) {
  if (name == "setup1_rwa") return Setup::setup1_rwa;
  if (name == "setup1_full") return Setup::setup1_full;
  if (name == "setup2") return Setup::setup2;
  throw PreconditionError("unknown setup '" + name + "'");
}

double ProtocolResult::final_epr_min() const {
  if (late_time_epr_average) return *late_time_epr_average;
  if (epr_min_series.empty()) throw PreconditionError("empty protocol result");
  return epr_min_series.back();
}

namespace {

const int kMechanics[] = {1};

std::vector<double> time_grid(double t_end, int n_points) {
  if (n_points < 1) throw PreconditionError("grid must have at least one point");
  if (!(t_end > 0.0)) throw PreconditionError("t_end must be > 0");
  return meanfield::uniform_grid(0.0, t_end, n_points);
}

// (c1, c2) from the two normal-mode marginals b1, b2.
GaussianState oscillators_from_normal_modes(const GaussianState& b1, const GaussianState& b2) {
  return beam_splitter_5050(direct_sum(b1, b2));
}

void record(ProtocolResult& out, double t, const GaussianState& c, const GaussianState& b) {
  out.times.push_back(t);
  out.epr_min_series.push_back(epr_min(c).value);
  out.occupations.push_back({mode_occupation(c, 0), mode_occupation(c, 1)});
  out.cross_moment.push_back(mode_moments(c).anomalous(0, 1));
  out.purity_series.push_back(purity(c));
  out.normal_mode_squeeze.push_back({squeeze_parameter(b, 0), squeeze_parameter(b, 1)});
}

struct Setup1Couplings {
  std::array<CouplingProfile, 2> profile;
};

Setup1Couplings setup1_couplings(const SystemParams& params) {
  params.validate();
  if (params.pump.size() != 2) throw PreconditionError("setup I needs exactly two pump drives");
  const double w = params.omega_m;
  if (std::abs(params.delta - w) > 1e-9 * w) throw PreconditionError("setup I needs delta = omega_m");
  Setup1Couplings c;
  for (int j = 0; j < 2; ++j) {
    c.profile[j] = meanfield::chi_from_drive(params.g, params.pump[j], params.kappa, w);
    // rejects chi1 >= chi2 before any simulation
    analytics::squeeze_param(c.profile[j].chi1, c.profile[j].chi2);
  }
  const auto& p1 = c.profile[0];
  const auto& p2 = c.profile[1];
  const double scale = std::max(p1.chi2, p2.chi2);
  if (std::abs(p1.chi1 - p2.chi1) > 1e-9 * scale || std::abs(p1.chi2 - p2.chi2) > 1e-9 * scale) {
    throw PreconditionError("condition violated: both subsystems need equal squeezing (r1 = r2)");
  }
  if (std::abs(std::remainder(p2.phi - p1.phi - kPi, kTwoPi)) > 1e-9) {
    throw PreconditionError("condition violated: effective phases must satisfy phi2 = phi1 + pi");
  }
  return c;
}

GaussianState subsystem_initial(double n_th) { return direct_sum(vacuum(1), thermal(1, n_th)); }

ProtocolResult setup1_skeleton(const SystemParams& params, const Setup1Couplings& c) {
  ProtocolResult out;
  out.prediction = analytics::predict(c.profile[0].chi1, c.profile[0].chi2, c.profile[0].phi, params.kappa,
                                      params.gamma_m, params.n_th);
  for (int j = 0; j < 2; ++j) out.schedule.push_back({0.0, params.pump[j], c.profile[j], params.delta});
  out.regime = "steady_state";
  return out;
}

}  // namespace

std::vector<DriveSpec> setup1_drives(double g, double chi1, double chi2, double phi, double kappa,
                                     double omega_m) {
  return {meanfield::drive_for_coupling(g, chi1, chi2, phi, kappa, omega_m),
          meanfield::drive_for_coupling(g, chi1, chi2, phi + kPi, kappa, omega_m)};
}

ProtocolResult run_setup1(const SystemParams& params, double t_end, int n_points) {
  const auto c = setup1_couplings(params);
  const auto grid = time_grid(t_end, n_points);
  ProtocolResult out = setup1_skeleton(params, c);

  std::array<Trajectory, 2> traj;
  for (int j = 0; j < 2; ++j) {
    const auto dyn = build_rwa_model(c.profile[j], params.kappa, params.gamma_m, params.n_th);
    traj[j] = evolve(dyn, subsystem_initial(params.n_th), 0.0, grid);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GaussianState b = direct_sum(traj[0].states[i].marginal(kMechanics), traj[1].states[i].marginal(kMechanics));
    const GaussianState osc = beam_splitter_5050(b);
    record(out, grid[i], osc, b);
  }
  out.final_state = beam_splitter_5050(
      direct_sum(traj[0].states.back().marginal(kMechanics), traj[1].states.back().marginal(kMechanics)));
  return out;
}

ProtocolResult run_setup1_full(const SystemParams& params, double t_end, int n_points) {
  const auto c = setup1_couplings(params);
  const auto grid = time_grid(t_end, n_points);
  ProtocolResult out = setup1_skeleton(params, c);
  out.regime = "lab_frame";

  const double period = kTwoPi / std::abs(c.profile[0].omega_mod);
  constexpr int kPeriodSamples = 64;
  std::vector<double> late;
  for (int k = 0; k < kPeriodSamples; ++k) {
    const double t = t_end - period + period * k / kPeriodSamples;
    if (t >= 0.0) late.push_back(t);
  }
  std::vector<double> merged = grid;
  merged.insert(merged.end(), late.begin(), late.end());
  std::sort(merged.begin(), merged.end());

  std::array<Trajectory, 2> traj;
  for (int j = 0; j < 2; ++j) {
    const auto dyn =
        build_full_model(c.profile[j], params.delta, params.omega_m, params.kappa, params.gamma_m, params.n_th);
    traj[j] = evolve(dyn, subsystem_initial(params.n_th), 0.0, merged);
  }
  auto normal_modes_at = [&](std::size_t i) {
    return direct_sum(traj[0].states[i].marginal(kMechanics), traj[1].states[i].marginal(kMechanics));
  };

  std::size_t next_grid = 0;
  double late_sum = 0.0;
  int late_count = 0;
  std::size_t late_cursor = 0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const double t = merged[i];
    const bool is_grid = next_grid < grid.size() && grid[next_grid] == t;
    const bool is_late = late_cursor < late.size() && late[late_cursor] == t;
    if (!is_grid && !is_late) continue;
    const GaussianState b = normal_modes_at(i);
    const GaussianState osc = beam_splitter_5050(b);
    if (is_grid) {
      record(out, t, osc, b);
      ++next_grid;
    }
    if (is_late) {
      late_sum += epr_min(osc).value;
      ++late_count;
      ++late_cursor;
    }
  }
  out.final_state = beam_splitter_5050(normal_modes_at(merged.size() - 1));
  if (late_count > 0) out.late_time_epr_average = late_sum / late_count;

  try {
    std::array<GaussianState, 2> steady{vacuum(1), vacuum(1)};
    for (int j = 0; j < 2; ++j) {
      steady[j] = steady_state(build_rwa_model(c.profile[j], params.kappa, params.gamma_m, params.n_th))
                      .marginal(kMechanics);
    }
    out.rwa_epr_min = epr_min(oscillators_from_normal_modes(steady[0], steady[1])).value;
  } catch (const StabilityError& e) {
    out.warnings.push_back(std::string("no rotating-wave steady state: ") + e.what());
  }
  return out;
}

TwoStepSchedule make_two_step_schedule(const SystemParams& params, double t_switch, double t_min_multiplier,
                                       StepOrder order, bool single_step) {
  params.validate();
  if (params.pump.empty()) throw PreconditionError("setup II needs a pump drive");
  const double w = params.omega_m;
  const CouplingProfile first = meanfield::chi_from_drive(params.g, params.pump[0], params.kappa, w);
  const double r = analytics::squeeze_param(first.chi1, first.chi2);
  (void)r;

  TwoStepSchedule s;
  s.single_step = single_step;
  const double detuning_d1 = w - params.j12;  // delta + j12 = omega_m
  const double detuning_d2 = w + params.j12;  // delta - j12 = omega_m
  s.step1 = {0.0, params.pump[0], first, order == StepOrder::d1_first ? detuning_d1 : detuning_d2};

  DriveSpec second_drive = params.pump[0];
  second_drive.phi1 += kPi;
  CouplingProfile second = first;
  second.phi += kPi;

  if (t_switch <= 0.0) {
    const auto tm = analytics::t_min(params.kappa, analytics::transfer_rate(first.chi1, first.chi2));
    t_switch = t_min_multiplier * tm.value;
  }
  if (!(t_switch > 0.0)) throw PreconditionError("t_switch must be > 0");
  s.t_switch = t_switch;
  s.step2 = {t_switch, second_drive, second, order == StepOrder::d1_first ? detuning_d2 : detuning_d1};
  return s;
}

ProtocolResult run_setup2(const SystemParams& params, const TwoStepSchedule& schedule, double t_end,
                          int n_points) {
  params.validate();
  if (params.j12 == 0.0) throw PreconditionError("setup II needs j12 != 0");
  const auto& prof = schedule.step1.coupling;
  analytics::squeeze_param(prof.chi1, prof.chi2);
  analytics::squeeze_param(schedule.step2.coupling.chi1, schedule.step2.coupling.chi2);
  const auto grid = time_grid(t_end, n_points);

  ProtocolResult out;
  out.prediction = analytics::predict(prof.chi1, prof.chi2, prof.phi, params.kappa, params.gamma_m, params.n_th, true);
  const double window = std::min({params.omega_m, std::abs(params.j12), std::abs(std::abs(params.j12) - params.omega_m)});
  if (prof.chi2 > 0.1 * window) {
    std::ostringstream msg;
    msg << "validity window: chi2 = " << prof.chi2 << " is not << min(omega_m, |j12|, ||j12| - omega_m|) = "
        << window;
    out.warnings.push_back(msg.str());
  }
  const bool efficient = params.gamma_m * params.n_th < 0.1 * params.kappa;
  out.regime = schedule.single_step ? "single_step" : (efficient ? "two_step_efficient" : "two_step_thermal");

  auto model_for = [&](const ScheduleEntry& entry) {
    SystemParams p = params;
    p.delta = entry.detuning;
    return build_two_cavity_model(p, entry.coupling).full;
  };

  const Matrix normal_map = two_cavity_normal_mode_map();
  const int osc_modes[] = {2, 3};
  const int b_modes[] = {1, 3};
  auto emit = [&](double t, const GaussianState& full) {
    const GaussianState c = full.marginal(osc_modes);
    const GaussianState b = apply_symplectic(normal_map, full).marginal(b_modes);
    record(out, t, c, b);
    out.final_state = c;
  };

  GaussianState initial = direct_sum(vacuum(2), thermal(2, params.n_th));
  out.schedule.push_back(schedule.step1);
  if (schedule.single_step || schedule.t_switch >= t_end) {
    const auto traj = evolve(model_for(schedule.step1), initial, 0.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) emit(grid[i], traj.states[i]);
    return out;
  }

  out.schedule.push_back(schedule.step2);
  std::vector<double> first, second;
  for (double t : grid) (t <= schedule.t_switch ? first : second).push_back(t);
  first.push_back(schedule.t_switch);
  const auto traj1 = evolve(model_for(schedule.step1), initial, 0.0, first);
  for (std::size_t i = 0; i + 1 < first.size(); ++i) emit(first[i], traj1.states[i]);
  const GaussianState& at_switch = traj1.states.back();
  {
    const GaussianState b = apply_symplectic(normal_map, at_switch).marginal(b_modes);
    out.diagnostics["switch_time"] = schedule.t_switch;
    out.diagnostics["switch_b1_squeeze"] = squeeze_parameter(b, 0);
    out.diagnostics["switch_b2_squeeze"] = squeeze_parameter(b, 1);
    out.diagnostics["switch_b1_occupation"] = mode_occupation(b, 0);
    out.diagnostics["switch_b2_occupation"] = mode_occupation(b, 1);
  }
  if (!second.empty()) {
    const auto traj2 = evolve(model_for(schedule.step2), at_switch, schedule.t_switch, second);
    for (std::size_t i = 0; i < second.size(); ++i) emit(second[i], traj2.states[i]);
  }
  return out;
}

ProtocolResult run(const ProtocolRequest& request) {
  switch (request.setup) {
    case Setup::setup1_rwa:
      return run_setup1(request.params, request.t_end, request.n_points);
    case Setup::setup1_full:
      return run_setup1_full(request.params, request.t_end, request.n_points);
    case Setup::setup2: {
      const auto schedule = make_two_step_schedule(request.params, request.t_switch, request.t_min_multiplier,
                                                   request.order, request.single_step);
      return run_setup2(request.params, schedule, request.t_end, request.n_points);
    }
  }
  throw PreconditionError("unknown setup");
}

void apply_axis(ProtocolRequest& request, const std::string& axis, double value) {
  SystemParams& p = request.params;
  if (axis == "omega_m") {
    p.omega_m = value;
  } else if (axis == "kappa") {
    p.kappa = value;
  } else if (axis == "gamma_m") {
    p.gamma_m = value;
  } else if (axis == "n_th") {
    p.n_th = value;
  } else if (axis == "g") {
    p.g = value;
  } else if (axis == "delta") {
    p.delta = value;
  } else if (axis == "j12") {
    p.j12 = value;
  } else if (axis == "t_end") {
    request.t_end = value;
  } else if (axis == "chi1" || axis == "chi2") {
    const double root = std::sqrt(p.kappa * p.kappa + p.omega_m * p.omega_m);
    for (auto& d : p.pump) (axis == "chi1" ? d.e1 : d.e2) = value * root / p.g;
  } else {
    throw PreconditionError("unknown sweep axis '" + axis + "'");
  }
}

std::vector<SweepRow> sweep(const ProtocolRequest& base, const std::string& axis, const std::vector<double>& values,
                            int workers) {
  {
    ProtocolRequest probe = base;
    apply_axis(probe, axis, 0.0);
  }
  std::vector<SweepRow> rows(values.size());
  auto run_row = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = values[i];
    try {
      ProtocolRequest req = base;
      apply_axis(req, axis, values[i]);
      const ProtocolResult res = run(req);
      row.status = "ok";
      row.epr_min = res.final_epr_min();
      row.occupation = res.occupations.back()[0];
      const bool single = req.setup == Setup::setup2 && req.single_step;
      row.predicted_epr_min = single && res.prediction.setup2 ? res.prediction.setup2->epr_min_inf : res.prediction.epr_min;
    } catch (const StabilityError& e) {
      row.status = "unstable";
      row.message = e.what();
    } catch (const std::exception& e) {
      row.status = "error";
      row.message = e.what();
    }
  };

  const std::size_t pool = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, values.size() > 0 ? values.size() : 1);
  if (pool <= 1) {
    for (std::size_t i = 0; i < values.size(); ++i) run_row(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < pool; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < values.size(); i = next++) run_row(i);
    });
  }
  for (auto& t : threads) t.join();
  return rows;
}

}  // namespace mechsq::protocols
