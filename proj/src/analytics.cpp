#include "mechsq/analytics.hpp"

#include <cmath>

namespace mechsq::analytics {

namespace {

void require_stable(double chi1, double chi2) {
  if (!(chi1 >= 0.0) || !(chi2 >= 0.0)) throw PreconditionError("couplings must be >= 0");
  if (!(chi1 < chi2)) {
    throw StabilityError("stability violated: chi1 >= chi2 (cooling must dominate over anti-damping)");
  }
}

}  // namespace

double squeeze_param(double chi1, double chi2) {
  require_stable(chi1, chi2);
  return std::atanh(chi1 / chi2);
}

double transfer_rate(double chi1, double chi2) {
  require_stable(chi1, chi2);
  const double ratio = chi1 / chi2;
  return chi2 * std::sqrt(1.0 - ratio * ratio);
}

double d0(double kappa, double gamma_m, double G) {
  if (!(kappa >= 0.0) || !(gamma_m >= 0.0)) throw PreconditionError("rates must be >= 0");
  if (kappa == 0.0 && gamma_m == 0.0) throw PreconditionError("d0 is undefined for kappa = gamma_m = 0");
  const double g2 = G * G;
  return 1.0 - 4.0 * kappa * g2 / ((kappa + gamma_m) * (kappa * gamma_m + 4.0 * g2));
}

double d0_approx(double kappa, double gamma_m, double G) {
  if (!(kappa > 0.0) || !(G > 0.0)) throw PreconditionError("d0_approx needs kappa > 0 and G > 0");
  return gamma_m / kappa + kappa * gamma_m / (4.0 * G * G);
}

SteadyMoments steady_moments(double r, double phi, double d0, double n_th) {
  const double c2 = std::cosh(2.0 * r), s2 = std::sinh(2.0 * r), s = std::sinh(r);
  const double d1 = n_th * c2 + s * s;
  const double d2 = (n_th + 0.5) * s2;
  SteadyMoments m;
  m.occupation = d0 * d1 * c2 - d0 * d2 * s2 + s * s;
  m.cross = (-(d0 * d1 + 0.5) * s2 + d0 * d2 * c2) * std::polar(1.0, phi);
  return m;
}

double epr_min_setup1(double r, double d0, double n_th) {
  return 2.0 * std::exp(-2.0 * r) * (1.0 - d0) + 2.0 * (2.0 * n_th + 1.0) * d0;
}

double nth_max_setup1(double r, double d0) {
  if (d0 == 0.0) throw UnboundedError("n_th,max is unbounded for d0 = 0");
  if (!(d0 > 0.0 && d0 <= 1.0)) throw PreconditionError("d0 must lie in (0, 1]");
  return (1.0 - d0) / (2.0 * d0) * (1.0 - std::exp(-2.0 * r));
}

double nth_max_setup1_approx(double kappa, double gamma_m, double chi1, double chi2) {
  if (gamma_m == 0.0) throw UnboundedError("n_th,max is unbounded for gamma_m = 0");
  return 4.0 * kappa * chi1 * (chi2 - chi1) / (gamma_m * (kappa * kappa + 4.0 * (chi2 * chi2 - chi1 * chi1)));
}

std::pair<Complex, Complex> eta(double kappa, double G) {
  const Complex root = std::sqrt(Complex(kappa * kappa / 4.0 - G * G, 0.0));
  return {-kappa / 2.0 + root, -kappa / 2.0 - root};
}

PreparationTime t_min(double kappa, double G) {
  if (!(kappa > 0.0)) throw PreconditionError("t_min needs kappa > 0");
  if (!(G > 0.0)) throw PreconditionError("t_min undefined for G = 0: no state transfer");
  if (G >= kappa / 2.0) return {4.0 / kappa, false};
  const double slow = eta(kappa, G).first.real();
  return {2.0 / std::abs(slow), true};
}

Setup2Thermal setup2_thermal(double r, double phi, double d0, double n_th) {
  const double c2 = std::cosh(2.0 * r), s2 = std::sinh(2.0 * r), s = std::sinh(r);
  const double d1 = n_th * c2 + s * s;
  const double d2 = (n_th + 0.5) * s2;
  Setup2Thermal out;
  out.r_tilde = 0.25 * std::log((2.0 * d0 * (d1 + d2) + 1.0) / (2.0 * d0 * (d1 - d2) + 1.0));
  const double a = d0 * d1 + 0.5;
  out.n_bar2 = std::sqrt(a * a - d0 * d0 * d2 * d2) - 0.5;
  out.xi2 = std::polar(r - out.r_tilde, -phi);
  out.epr_min_inf = std::exp(-2.0 * r) * (1.0 - d0) + (2.0 * n_th + 1.0) * (1.0 + d0);
  out.nth_max = (1.0 - d0) / (2.0 * (1.0 + d0)) * (1.0 - std::exp(-2.0 * r));
  return out;
}

AnalyticPrediction predict(double chi1, double chi2, double phi, double kappa, double gamma_m, double n_th,
                           bool include_setup2) {
  AnalyticPrediction p;
  p.r = squeeze_param(chi1, chi2);
  p.G = transfer_rate(chi1, chi2);
  p.d0 = d0(kappa, gamma_m, p.G);
  p.d0_approx = (kappa > 0.0 && p.G > 0.0) ? d0_approx(kappa, gamma_m, p.G) : 1.0;
  const auto m = steady_moments(p.r, phi, p.d0, n_th);
  p.occupation = m.occupation;
  p.cross = m.cross;
  p.epr_min = epr_min_setup1(p.r, p.d0, n_th);
  if (p.d0 > 0.0) p.nth_max = nth_max_setup1(p.r, p.d0);
  if (gamma_m > 0.0) p.nth_max_approx = nth_max_setup1_approx(kappa, gamma_m, chi1, chi2);
  if (kappa > 0.0 && p.G > 0.0) p.t_min = t_min(kappa, p.G);
  p.eigen = eta(kappa, p.G);
  if (include_setup2) p.setup2 = setup2_thermal(p.r, phi, p.d0, n_th);
  return p;
}

}  // namespace mechsq::analytics
