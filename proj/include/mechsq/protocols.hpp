#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mechsq/analytics.hpp"
#include "mechsq/dynamics.hpp"
#include "mechsq/gaussian.hpp"

namespace mechsq::protocols {

enum class Setup { setup1_rwa, setup1_full, setup2 };

std::string to_string(Setup setup);
Setup parse_setup(const std::string& name);

/// One segment of a drive schedule, active from t_start on.
struct ScheduleEntry {
  double t_start = 0.0;
  DriveSpec drive;
  CouplingProfile coupling;
  /// laser detuning of the cavities during this segment
  double detuning = 0.0;
};

struct ProtocolResult {
  std::vector<double> times;
  std::vector<double> epr_min_series;
  std::vector<std::array<double, 2>> occupations;
  std::vector<Complex> cross_moment;
  std::vector<double> purity_series;
  /// squeeze parameters of the normal modes b1, b2 at each time
  std::vector<std::array<double, 2>> normal_mode_squeeze;
  /// (c1, c2) at the last grid time
  GaussianState final_state = vacuum(2);
  analytics::AnalyticPrediction prediction;
  std::vector<ScheduleEntry> schedule;
  /// setup1_full: epr_min averaged over the last modulation period
  std::optional<double> late_time_epr_average;
  /// setup1_full: epr_min of the rotating-wave steady state
  std::optional<double> rwa_epr_min;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;
  std::string regime;

  /// Late-time figure of merit: the period average when available,
  /// otherwise the last epr_min sample.
  double final_epr_min() const;
};

/// Coupled-cavity drive sequence. Step 1 puts the d1 normal mode on
/// resonance (delta + j12 = omega_m), step 2 switches to d2
/// (delta - j12 = omega_m) and shifts the modulated tone's phase by pi.
struct TwoStepSchedule {
  ScheduleEntry step1;
  ScheduleEntry step2;
  double t_switch = 0.0;
  /// only step 1 is applied, for the whole run
  bool single_step = false;
};

enum class StepOrder { d1_first, d2_first };

/// Builds the schedule from params.pump[0] (amplitudes and phases of step 1).
/// t_switch <= 0 selects analytics t_min times `t_min_multiplier`.
TwoStepSchedule make_two_step_schedule(const SystemParams& params, double t_switch = 0.0,
                                       double t_min_multiplier = 3.0, StepOrder order = StepOrder::d1_first,
                                       bool single_step = false);

/// Two subsystems (a_j, b_j) in the rotating-wave approximation, recombined
/// into the oscillators (c1, c2). params.pump must hold two drives satisfying
/// r1 = r2 and phi2 = phi1 + pi.
ProtocolResult run_setup1(const SystemParams& params, double t_end, int n_points);

/// Same arrangement integrated in the lab frame with the time-periodic coupling.
ProtocolResult run_setup1_full(const SystemParams& params, double t_end, int n_points);

/// Four-mode coupled-cavity model driven through `schedule`.
ProtocolResult run_setup2(const SystemParams& params, const TwoStepSchedule& schedule, double t_end,
                          int n_points);

/// Complete description of one protocol run.
struct ProtocolRequest {
  Setup setup = Setup::setup1_rwa;
  SystemParams params;
  double t_end = 1000.0;
  int n_points = 101;
  /// setup2 only
  double t_switch = 0.0;
  double t_min_multiplier = 3.0;
  StepOrder order = StepOrder::d1_first;
  bool single_step = false;

  bool operator==(const ProtocolRequest&) const = default;
};

ProtocolResult run(const ProtocolRequest& request);

/// Symmetric drive pair for setup I with effective couplings (chi1, chi2)
/// and phases phi, phi + pi, derived through the pump-phase conditions.
std::vector<DriveSpec> setup1_drives(double g, double chi1, double chi2, double phi, double kappa,
                                     double omega_m);

/// Sets a named parameter: any SystemParams scalar (omega_m, kappa, gamma_m,
/// n_th, g, delta, j12), "t_end", or the effective couplings "chi1" / "chi2"
/// (rescaling every pump's tone amplitude). Throws PreconditionError on an
/// unknown name.
void apply_axis(ProtocolRequest& request, const std::string& axis, double value);

struct SweepRow {
  double value = 0.0;
  std::string status;  ///< "ok", "unstable" or "error"
  std::string message;
  double epr_min = 0.0;
  double predicted_epr_min = 0.0;
  double occupation = 0.0;
};

/// Runs one request per axis value. Rows are independent: failures are
/// recorded per row. Results are ordered as `values` regardless of `workers`.
std::vector<SweepRow> sweep(const ProtocolRequest& base, const std::string& axis, const std::vector<double>& values,
                            int workers = 1);

}  // namespace mechsq::protocols
