#pragma once

#include <span>
#include <string>
#include <vector>

#include "mechsq/dynamics.hpp"
#include "mechsq/gaussian.hpp"

namespace mechsq::fock {

// Truncated-Fock master-equation integrator for one (cavity a, mechanics b)
// subsystem under the rotating-wave Hamiltonian
//   H = chi2 (a^dag b + b^dag a) + chi1 (e^{-i phi} a b + e^{i phi} a^dag b^dag).
// Basis index: i_a * dim_mech + i_b.

struct FockConfig {
  int dim_cavity = 12;
  int dim_mech = 12;
  double rtol = 1e-8;
  double atol = 1e-10;
  double t_end = 1000.0;

  void validate() const;
};

struct Rates {
  double kappa = 0.05;
  double gamma_m = 0.0;
  double n_th = 0.0;
};

class DensityOperator {
public:
  DensityOperator(CMatrix rho, int dim_cavity, int dim_mech);

  static DensityOperator vacuum(int dim_cavity, int dim_mech);
  /// |n_a><n_a| (x) thermal(n_mech) on the mechanics, renormalised to the truncation.
  static DensityOperator product(int dim_cavity, int dim_mech, int n_a, double n_mech);
  static DensityOperator fock_state(int dim_cavity, int dim_mech, int n_a, int n_b);

  const CMatrix& matrix() const { return rho_; }
  int dim_cavity() const { return dim_cavity_; }
  int dim_mech() const { return dim_mech_; }

  Complex trace() const { return rho_.trace(); }
  double purity() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
  /// Largest population in the top Fock level of either mode.
  double top_level_population() const;
  /// Throws PreconditionError if trace, Hermiticity or positivity fail.
  void check_invariants(double herm_tol = 1e-10, double trace_tol = 1e-8, double eig_tol = 1e-8) const;

private:
  CMatrix rho_;
  int dim_cavity_;
  int dim_mech_;
};

/// Integrates d rho/dt = -i[H, rho] + kappa D[a] + gamma_m (n_th + 1) D[b]
/// + gamma_m n_th D[b^dag] from rho0 to cfg.t_end. Throws TruncationError if
/// the top-level population exceeds 1e-6.
DensityOperator evolve_dm(const CouplingProfile& profile, const Rates& rates, const FockConfig& cfg,
                          const DensityOperator& rho0);

/// States at each of `times` (measured from t = 0).
std::vector<DensityOperator> evolve_dm_trajectory(const CouplingProfile& profile, const Rates& rates,
                                                  const FockConfig& cfg, const DensityOperator& rho0,
                                                  std::span<const double> times);

/// Two-mode (a, b) Gaussian moments of rho.
GaussianState moments_from_dm(const DensityOperator& rho);

struct ConvergenceReport {
  int dim_low = 0;
  int dim_high = 0;
  /// largest absolute difference over means and covariance entries
  double max_difference = 0.0;
  bool passed = false;
  std::string message;
};

/// Runs evolve_dm from vacuum at cfg dims and at dims + 4 and compares moments.
ConvergenceReport convergence_check(const CouplingProfile& profile, const Rates& rates, const FockConfig& cfg,
                                    double tolerance = 1e-4);

}  // namespace mechsq::fock
