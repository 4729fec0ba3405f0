#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mechsq/gaussian.hpp"
#include "mechsq/types.hpp"

namespace mechsq {

// Units: omega_m = 1, time in 1/omega_m. Lindblad rates follow the
// kappa/2 (2 a rho a^dag - ...) normalisation, i.e. amplitude decay kappa/2.

/// Two-tone pump: E(t) = e1 e^{-i(omega_mod t - phi1)} + e2 e^{i phi2}.
struct DriveSpec {
  double e1 = 0.0;
  double e2 = 0.0;
  double omega_mod = 2.0;
  double phi1 = 0.0;
  double phi2 = 0.0;

  bool operator==(const DriveSpec&) const = default;
};

/// chi(t) = chi1 e^{-i(omega_mod t - phi)} + chi2.
struct CouplingProfile {
  double chi1 = 0.0;
  double chi2 = 0.0;
  double omega_mod = 2.0;
  double phi = 0.0;

  Complex at(double t) const { return std::polar(chi1, -(omega_mod * t - phi)) + chi2; }
  bool operator==(const CouplingProfile&) const = default;
};

struct SystemParams {
  double omega_m = 1.0;
  double kappa = 0.05;
  double gamma_m = 0.0;
  double n_th = 0.0;
  double g = 1e-6;
  /// cavity-laser detuning delta (setup I: per subsystem, shared value)
  double delta = 1.0;
  /// inter-cavity tunnelling (setup II only)
  double j12 = 0.0;
  std::vector<DriveSpec> pump;

  /// Throws PreconditionError on negative rates or occupation.
  void validate() const;
  bool operator==(const SystemParams&) const = default;
};

/// Moment generator: d<R>/dt = A(t) <R>, dV/dt = A V + V A^T + D.
/// A(t) = A0 + sum_k f_k(t) A_k.
class LinearDynamics {
public:
  struct Term {
    Matrix generator;
    std::function<double(double)> coefficient;
  };

  LinearDynamics(Matrix drift, Matrix diffusion);
  LinearDynamics(Matrix static_drift, std::vector<Term> terms, Matrix diffusion, std::optional<double> period);

  int n_modes() const { return static_cast<int>(diffusion_.rows() / 2); }
  Matrix drift_at(double t) const;
  const Matrix& diffusion() const { return diffusion_; }
  bool is_time_dependent() const { return !terms_.empty(); }
  std::optional<double> period() const { return period_; }

private:
  Matrix static_drift_;
  std::vector<Term> terms_;
  Matrix diffusion_;
  std::optional<double> period_;
};

/// Rotating-frame model of one (cavity a, mechanics b) pair with
/// H = (chi1 e^{-i phi} b + chi2 b^dag) a + h.c. Mode order: a, b.
LinearDynamics build_rwa_model(const CouplingProfile& profile, double kappa, double gamma_m, double n_th);

/// Lab-frame linearised model
/// H = delta a^dag a + omega_m b^dag b + (chi*(t) a + chi(t) a^dag)(b + b^dag).
LinearDynamics build_full_model(const CouplingProfile& profile, double delta, double omega_m, double kappa,
                                double gamma_m, double n_th);

struct TwoCavityModel {
  /// modes (a1, a2, c1, c2)
  LinearDynamics full;
  /// (d1, b1) with detuning delta + j12
  LinearDynamics normal1;
  /// (d2, b2) with detuning delta - j12
  LinearDynamics normal2;
};

/// Two tunnel-coupled cavities, each holding one oscillator, sharing one pump.
/// Uses params.delta, params.j12, params.omega_m and the damping rates.
TwoCavityModel build_two_cavity_model(const SystemParams& params, const CouplingProfile& profile);

/// Symplectic map (a1, a2, c1, c2) -> (d1, b1, d2, b2) with
/// d = (a1 +/- a2)/sqrt2 and b = (c1 +/- c2)/sqrt2.
Matrix two_cavity_normal_mode_map();

struct Trajectory {
  std::vector<double> times;
  std::vector<GaussianState> states;
};

/// Integrates the moment equations (rel 1e-9, abs 1e-12) from t0 and returns
/// the state at each grid time (nondecreasing, >= t0).
Trajectory evolve(const LinearDynamics& dyn, const GaussianState& state, double t0, std::span<const double> grid);

/// Solves A V + V A^T + D = 0 for constant, Hurwitz A. Mean is zero.
GaussianState steady_state(const LinearDynamics& dyn);

std::vector<Complex> stability_eigenvalues(const LinearDynamics& dyn);

/// Largest real part among the drift eigenvalues.
double spectral_abscissa(const LinearDynamics& dyn);

}  // namespace mechsq
