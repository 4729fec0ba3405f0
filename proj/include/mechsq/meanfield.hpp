#pragma once

#include <array>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mechsq/dynamics.hpp"
#include "mechsq/types.hpp"

namespace mechsq::meanfield {

// Classical pump-field amplitudes. These equations damp the cavity amplitude
// at kappa (not kappa/2), as written for the mean fields; the quantum
// fluctuation models in dynamics.hpp use the Lindblad kappa/2 convention.

struct MeanFieldTrajectory {
  std::vector<double> times;
  /// alpha[j][i]: cavity amplitude of subsystem j at times[i]
  std::vector<std::vector<Complex>> alpha;
  std::vector<std::vector<Complex>> beta;
};

/// Integrates, for every pump in params.pump, from alpha = beta = 0:
///   dalpha/dt = -[kappa + i delta + i g (beta + beta*)] alpha + E(t)
///   dbeta/dt  = -(gamma_m + i omega_m) beta - i g |alpha|^2
/// Throws IntegrationError if |alpha| exceeds 1e12.
MeanFieldTrajectory integrate_meanfield(const SystemParams& params, std::span<const double> grid);

/// n_points equally spaced times on [t_start, t_end].
std::vector<double> uniform_grid(double t_start, double t_end, int n_points);

/// A harmonic component c e^{-i frequency t}.
struct Tone {
  double frequency = 0.0;
  Complex amplitude;
};

struct PerturbativeTones {
  std::vector<Tone> alpha0;
  std::vector<Tone> alpha2;
  std::vector<Tone> beta1;
};

/// Lowest-order expansion in g, valid for t >> 1/kappa at delta = omega_m,
/// omega_mod = 2 omega_m and gamma_m << omega_m. Throws PreconditionError
/// off resonance.
PerturbativeTones perturbative_tones(const SystemParams& params, int subsystem);

struct PerturbativeAmplitudes {
  Complex alpha0;
  Complex alpha2;
  Complex beta1;
};

PerturbativeAmplitudes perturbative_solution(const SystemParams& params, int subsystem, double t);

Complex evaluate(std::span<const Tone> tones, double t);

/// Least-squares fit of samples to sum_k c_k e^{-i f_k t}.
std::vector<Complex> fit_tones(std::span<const double> times, std::span<const Complex> values,
                               std::span<const double> frequencies);

struct LaserPhases {
  double phi11 = 0.0;
  double phi12 = 0.0;
  double phi21 = 0.0;
  double phi22 = 0.0;
};

/// Pump phases giving effective coupling phases phi_target (subsystem 1)
/// and phi_target + pi (subsystem 2).
LaserPhases phase_conditions(double kappa, double omega_m, double phi_target);

/// Effective coupling of a resonant two-tone pump, chi_k = g e_k / sqrt(kappa^2 + omega_m^2).
/// The phase is taken relative to the constant tone, so a constant-tone phase
/// of arctan(omega_m/kappa) gives phi = phi1 + phi2.
CouplingProfile chi_from_drive(double g, const DriveSpec& drive, double kappa, double omega_m);

/// Inverse of chi_from_drive for a chosen effective phase.
DriveSpec drive_for_coupling(double g, double chi1, double chi2, double phi, double kappa, double omega_m);

struct MembraneGeometry {
  double length = 1.0;
  double mass = 1.0;
  double omega_m = 1.0;
  std::array<double, 2> reflectivity{0.5, 0.5};
  std::array<double, 2> position{0.25, 0.75};
  std::array<double, 2> wavenumber{1.0, 2.0};
  std::array<double, 2> cavity_frequency{1.0, 1.0};

  void validate() const;
};

/// f(x) = 2 R sin(2 k x) / sqrt(1 - R^2 cos^2(2 k x))
double membrane_response(double reflectivity, double wavenumber, double position);

/// g(j,k) = omega_cj f_jk(x_k) / (L sqrt(m omega_m)) for cavity mode j, membrane k.
Eigen::Matrix2d coupling_from_geometry(const MembraneGeometry& geom);

/// Membrane positions with g11 = g12 and g21 = -g22. Scans a grid of
/// `grid_points` per axis, refines the best candidates by Gauss-Newton, and
/// returns the first one with residual < tolerance * ||g||. Positions in
/// `geom.position` are ignored.
std::optional<std::pair<double, double>> solve_membrane_positions(const MembraneGeometry& geom, double tolerance,
                                                                  int grid_points = 10000);

}  // namespace mechsq::meanfield
