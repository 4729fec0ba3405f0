#pragma once

#include <optional>
#include <utility>

#include "mechsq/types.hpp"

namespace mechsq::analytics {

// Closed-form steady-state predictions for dissipatively prepared two-mode
// mechanical squeezing. These are the oracles the simulations are checked
// against; nothing here integrates anything.

/// r = atanh(chi1/chi2). Throws StabilityError unless 0 <= chi1 < chi2.
double squeeze_param(double chi1, double chi2);

/// G = chi2 sqrt(1 - (chi1/chi2)^2), the squeezed-frame state-transfer rate.
double transfer_rate(double chi1, double chi2);

/// Mixedness of the dissipative fixed point, 0 (pure) .. 1 (no cavity cooling).
double d0(double kappa, double gamma_m, double G);
/// Large-cooperativity form gamma_m/kappa + kappa gamma_m/(4 G^2).
double d0_approx(double kappa, double gamma_m, double G);

struct SteadyMoments {
  double occupation = 0.0;  ///< <c_j^dag c_j>
  Complex cross;            ///< <c1 c2>
};

SteadyMoments steady_moments(double r, double phi, double d0, double n_th);

/// 2 e^{-2r}(1 - d0) + 2(2 n_th + 1) d0
double epr_min_setup1(double r, double d0, double n_th);

/// Largest n_th that still leaves epr_min < 2. Throws UnboundedError at d0 = 0.
double nth_max_setup1(double r, double d0);
double nth_max_setup1_approx(double kappa, double gamma_m, double chi1, double chi2);

/// Decay eigenvalues -kappa/2 +/- sqrt(kappa^2/4 - G^2).
std::pair<Complex, Complex> eta(double kappa, double G);

struct PreparationTime {
  double value = 0.0;
  /// set when G < kappa/2: the value is 2/|Re eta_+|, outside the regime
  /// where 4/kappa is established
  bool extrapolated = false;
};

PreparationTime t_min(double kappa, double G);

struct Setup2Thermal {
  double r_tilde = 0.0;
  double n_bar2 = 0.0;
  Complex xi2;
  double epr_min_inf = 0.0;
  double nth_max = 0.0;
};

/// Single-step steady state of the coupled-cavity arrangement: one normal mode
/// in a squeezed thermal state, the other thermal.
Setup2Thermal setup2_thermal(double r, double phi, double d0, double n_th);

struct AnalyticPrediction {
  double r = 0.0;
  double G = 0.0;
  double d0 = 0.0;
  double d0_approx = 0.0;
  double occupation = 0.0;
  Complex cross;
  double epr_min = 0.0;
  /// empty when unbounded (gamma_m = 0)
  std::optional<double> nth_max;
  std::optional<double> nth_max_approx;
  PreparationTime t_min;
  std::pair<Complex, Complex> eigen;
  std::optional<Setup2Thermal> setup2;
};

/// Everything above for one symmetric parameter set. Throws StabilityError
/// for chi1 >= chi2.
AnalyticPrediction predict(double chi1, double chi2, double phi, double kappa, double gamma_m, double n_th,
                           bool include_setup2 = false);

}  // namespace mechsq::analytics
