#include "mechsq/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "mechsq/ode.hpp"

namespace mechsq::meanfield {

namespace {

const Complex kI(0.0, 1.0);

}  // namespace

std::vector<double> uniform_grid(double t_start, double t_end, int n_points) {
  if (n_points < 1) throw PreconditionError("grid needs at least one point");
  if (!(t_end >= t_start)) throw PreconditionError("grid end precedes start");
  std::vector<double> grid(n_points);
  if (n_points == 1) {
    grid[0] = t_end;
    return grid;
  }
  const double step = (t_end - t_start) / (n_points - 1);
  for (int i = 0; i < n_points; ++i) grid[i] = t_start + i * step;
  grid.back() = t_end;
  return grid;
}

MeanFieldTrajectory integrate_meanfield(const SystemParams& params, std::span<const double> grid) {
  params.validate();
  if (params.pump.empty()) throw PreconditionError("mean-field integration needs at least one pump");
  if (grid.empty() || !(grid.back() > 0.0)) throw PreconditionError("t_end must be > 0");
  const std::size_t n_sub = params.pump.size();

  auto rhs = [&](const ode::State& y, ode::State& dydt, double t) {
    for (std::size_t j = 0; j < n_sub; ++j) {
      const DriveSpec& d = params.pump[j];
      const Complex alpha(y[4 * j], y[4 * j + 1]);
      const Complex beta(y[4 * j + 2], y[4 * j + 3]);
      const Complex pump = std::polar(d.e1, -(d.omega_mod * t - d.phi1)) + std::polar(d.e2, d.phi2);
      const Complex dalpha =
          -(params.kappa + kI * params.delta + kI * params.g * 2.0 * beta.real()) * alpha + pump;
      const Complex dbeta = -(params.gamma_m + kI * params.omega_m) * beta - kI * params.g * std::norm(alpha);
      dydt[4 * j] = dalpha.real();
      dydt[4 * j + 1] = dalpha.imag();
      dydt[4 * j + 2] = dbeta.real();
      dydt[4 * j + 3] = dbeta.imag();
    }
  };
  auto guard = [n_sub](const ode::State& y, double t) {
    for (std::size_t j = 0; j < n_sub; ++j) {
      if (std::hypot(y[4 * j], y[4 * j + 1]) > 1e12) throw IntegrationError("mean-field amplitude diverged", t);
    }
  };

  MeanFieldTrajectory out;
  out.times.assign(grid.begin(), grid.end());
  out.alpha.assign(n_sub, std::vector<Complex>(grid.size()));
  out.beta.assign(n_sub, std::vector<Complex>(grid.size()));
  auto observe = [&](std::size_t i, const ode::State& y) {
    for (std::size_t j = 0; j < n_sub; ++j) {
      out.alpha[j][i] = Complex(y[4 * j], y[4 * j + 1]);
      out.beta[j][i] = Complex(y[4 * j + 2], y[4 * j + 3]);
    }
  };
  ode::integrate(rhs, ode::State(4 * n_sub, 0.0), 0.0, grid, ode::Tolerances{1e-10, 1e-8}, observe, guard);
  return out;
}

PerturbativeTones perturbative_tones(const SystemParams& params, int subsystem) {
  if (subsystem < 0 || subsystem >= static_cast<int>(params.pump.size())) {
    throw PreconditionError("no pump for requested subsystem");
  }
  const DriveSpec& d = params.pump[subsystem];
  const double w = params.omega_m, k = params.kappa, g = params.g;
  const double scale = 1e-9 * std::max(1.0, w);
  if (std::abs(params.delta - w) > scale || std::abs(d.omega_mod - 2.0 * w) > scale) {
    throw PreconditionError("perturbative amplitudes need delta = omega_m and omega_mod = 2 omega_m");
  }
  if (!(params.gamma_m <= 1e-2 * w)) throw PreconditionError("perturbative amplitudes need gamma_m << omega_m");
  if (!(k > 0.0)) throw PreconditionError("perturbative amplitudes need kappa > 0");
  const double locked = std::atan(w / k);
  if (std::abs(std::remainder(d.phi2 - locked, kTwoPi)) > 1e-9) {
    throw PreconditionError("perturbative amplitudes need phi2 = arctan(omega_m/kappa)");
  }

  const double Om = d.omega_mod, E1 = d.e1, E2 = d.e2;
  const double phi = d.phi1 + d.phi2;
  const double n2 = k * k + w * w;
  const double root = std::sqrt(n2);
  const double den = 3.0 * w * n2 * n2;

  PerturbativeTones out;
  out.alpha0 = {{0.0, E2 / root}, {Om, std::polar(E1 / root, phi)}};
  out.alpha2 = {
      {0.0, 2.0 * kI * g * g * E2 * (2 * E1 * E1 + 3 * E2 * E2) / den * std::polar(1.0, -(phi - d.phi1))},
      {Om, 2.0 * kI * g * g * E1 * (3 * E1 * E1 + 2 * E2 * E2) / den * std::polar(1.0, 2 * phi - d.phi1)},
      {-Om, -2.0 * kI * g * g * E1 * E2 * E2 / den * std::polar(1.0, -d.phi1)},
      {2.0 * Om, -2.0 * kI * g * g * E1 * E1 * E2 / (3.0 * w * n2 * root * Complex(k, -3.0 * w)) *
                     std::polar(1.0, 2.0 * phi)},
  };
  out.beta1 = {
      {0.0, Complex(-g * (E1 * E1 + E2 * E2) / (w * n2), 0.0)},
      {-Om, -g * E1 * E2 / (3.0 * w * n2) * std::polar(1.0, -phi)},
      {Om, g * E1 * E2 / (w * n2) * std::polar(1.0, phi)},
  };
  return out;
}

Complex evaluate(std::span<const Tone> tones, double t) {
  Complex sum = 0.0;
  for (const auto& tone : tones) sum += tone.amplitude * std::polar(1.0, -tone.frequency * t);
  return sum;
}

PerturbativeAmplitudes perturbative_solution(const SystemParams& params, int subsystem, double t) {
  const auto tones = perturbative_tones(params, subsystem);
  return {evaluate(tones.alpha0, t), evaluate(tones.alpha2, t), evaluate(tones.beta1, t)};
}

std::vector<Complex> fit_tones(std::span<const double> times, std::span<const Complex> values,
                               std::span<const double> frequencies) {
  if (times.size() != values.size()) throw PreconditionError("times and values differ in length");
  if (times.size() < frequencies.size()) throw PreconditionError("fewer samples than tones");
  const auto n = static_cast<Eigen::Index>(times.size());
  const auto m = static_cast<Eigen::Index>(frequencies.size());
  CMatrix basis(n, m);
  CVector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs(i) = values[i];
    for (Eigen::Index k = 0; k < m; ++k) basis(i, k) = std::polar(1.0, -frequencies[k] * times[i]);
  }
  const CVector c = basis.colPivHouseholderQr().solve(rhs);
  return {c.data(), c.data() + m};
}

LaserPhases phase_conditions(double kappa, double omega_m, double phi_target) {
  if (!(kappa >= 0.0) || !(omega_m > 0.0)) throw PreconditionError("phase conditions need kappa >= 0, omega_m > 0");
  const double locked = std::atan2(omega_m, kappa);
  LaserPhases p;
  p.phi12 = p.phi22 = locked;
  p.phi11 = phi_target - locked;
  p.phi21 = p.phi11 + kPi;
  return p;
}

CouplingProfile chi_from_drive(double g, const DriveSpec& drive, double kappa, double omega_m) {
  if (std::abs(drive.omega_mod - 2.0 * omega_m) > 1e-9 * std::max(1.0, omega_m)) {
    throw PreconditionError("chi_from_drive needs omega_mod = 2 omega_m");
  }
  const double root = std::sqrt(kappa * kappa + omega_m * omega_m);
  const double locked = std::atan2(omega_m, kappa);
  CouplingProfile p;
  p.chi1 = g * drive.e1 / root;
  p.chi2 = g * drive.e2 / root;
  p.omega_mod = drive.omega_mod;
  p.phi = drive.phi1 - drive.phi2 + 2.0 * locked;
  return p;
}

DriveSpec drive_for_coupling(double g, double chi1, double chi2, double phi, double kappa, double omega_m) {
  if (!(g > 0.0)) throw PreconditionError("drive_for_coupling needs g > 0");
  const double root = std::sqrt(kappa * kappa + omega_m * omega_m);
  const auto phases = phase_conditions(kappa, omega_m, phi);
  return {chi1 * root / g, chi2 * root / g, 2.0 * omega_m, phases.phi11, phases.phi12};
}

void MembraneGeometry::validate() const {
  if (!(length > 0.0) || !(mass > 0.0) || !(omega_m > 0.0)) {
    throw PreconditionError("length, mass and omega_m must be > 0");
  }
  for (int k = 0; k < 2; ++k) {
    if (!(reflectivity[k] > 0.0 && reflectivity[k] < 1.0)) {
      throw PreconditionError("reflectivity must lie in (0, 1)");
    }
  }
}

double membrane_response(double reflectivity, double wavenumber, double position) {
  const double arg = 2.0 * wavenumber * position;
  const double c = reflectivity * std::cos(arg);
  return 2.0 * reflectivity * std::sin(arg) / std::sqrt(1.0 - c * c);
}

Eigen::Matrix2d coupling_from_geometry(const MembraneGeometry& geom) {
  geom.validate();
  for (int k = 0; k < 2; ++k) {
    if (!(geom.position[k] > 0.0 && geom.position[k] < geom.length)) {
      throw PreconditionError("membrane positions must lie inside the cavity");
    }
  }
  const double norm = geom.length * std::sqrt(geom.mass * geom.omega_m);
  Eigen::Matrix2d g;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      g(j, k) = geom.cavity_frequency[j] *
                membrane_response(geom.reflectivity[k], geom.wavenumber[j], geom.position[k]) / norm;
    }
  }
  return g;
}

namespace {

Eigen::Vector2d position_residual(const MembraneGeometry& geom, double x1, double x2) {
  MembraneGeometry probe = geom;
  probe.position = {x1, x2};
  const Eigen::Matrix2d g = coupling_from_geometry(probe);
  return {g(0, 0) - g(0, 1), g(1, 0) + g(1, 1)};
}

}  // namespace

std::optional<std::pair<double, double>> solve_membrane_positions(const MembraneGeometry& geom, double tolerance,
                                                                  int grid_points) {
  geom.validate();
  if (geom.wavenumber[0] == geom.wavenumber[1]) throw PreconditionError("cavity wavenumbers must differ");
  if (grid_points < 2) throw PreconditionError("grid needs at least two points per axis");
  const double L = geom.length;
  const double norm = L * std::sqrt(geom.mass * geom.omega_m);
  const auto n = static_cast<std::size_t>(grid_points);

  // g(j,k) on membrane k's grid only depends on that membrane's position.
  std::vector<double> x(n), g11(n), g21(n), g12(n), g22(n);
  double max1 = 0.0, max2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = L * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    g11[i] = geom.cavity_frequency[0] * membrane_response(geom.reflectivity[0], geom.wavenumber[0], x[i]) / norm;
    g21[i] = geom.cavity_frequency[1] * membrane_response(geom.reflectivity[0], geom.wavenumber[1], x[i]) / norm;
    g12[i] = geom.cavity_frequency[0] * membrane_response(geom.reflectivity[1], geom.wavenumber[0], x[i]) / norm;
    g22[i] = geom.cavity_frequency[1] * membrane_response(geom.reflectivity[1], geom.wavenumber[1], x[i]) / norm;
    max1 = std::max({max1, std::abs(g11[i]), std::abs(g12[i])});
    max2 = std::max({max2, std::abs(g21[i]), std::abs(g22[i])});
  }

  // Keep the best-scoring nontrivial grid points (both g1 and g2 nonzero).
  struct Candidate {
    double score;
    std::size_t i, j;
    bool operator<(const Candidate& o) const { return score < o.score; }
  };
  constexpr std::size_t kKeep = 64;
  std::priority_queue<Candidate> best;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(g11[i]) < 1e-2 * max1 || std::abs(g21[i]) < 1e-2 * max2) continue;
    const double row = g11[i] * g11[i] + g21[i] * g21[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double r1 = g11[i] - g12[j];
      const double r2 = g21[i] + g22[j];
      const double score = (r1 * r1 + r2 * r2) / (row + g12[j] * g12[j] + g22[j] * g22[j]);
      if (best.size() < kKeep) {
        best.push({score, i, j});
      } else if (score < best.top().score) {
        best.pop();
        best.push({score, i, j});
      }
    }
  }
  std::vector<Candidate> ordered;
  while (!best.empty()) {
    ordered.push_back(best.top());
    best.pop();
  }
  std::reverse(ordered.begin(), ordered.end());

  const double h = 1e-7 * L;
  for (const auto& cand : ordered) {
    Eigen::Vector2d pos(x[cand.i], x[cand.j]);
    bool inside = true;
    for (int iter = 0; iter < 50 && inside; ++iter) {
      const Eigen::Vector2d r = position_residual(geom, pos(0), pos(1));
      Eigen::Matrix2d J;
      for (int c = 0; c < 2; ++c) {
        Eigen::Vector2d step = Eigen::Vector2d::Zero();
        step(c) = h;
        J.col(c) = (position_residual(geom, pos(0) + step(0), pos(1) + step(1)) -
                    position_residual(geom, pos(0) - step(0), pos(1) - step(1))) /
                   (2.0 * h);
      }
      const Eigen::Vector2d delta = J.completeOrthogonalDecomposition().solve(-r);
      pos += delta;
      inside = pos(0) > 0.0 && pos(0) < L && pos(1) > 0.0 && pos(1) < L;
      if (delta.norm() < 1e-15 * L) break;
    }
    if (!inside) continue;
    MembraneGeometry solved = geom;
    solved.position = {pos(0), pos(1)};
    const Eigen::Matrix2d g = coupling_from_geometry(solved);
    const Eigen::Vector2d r(g(0, 0) - g(0, 1), g(1, 0) + g(1, 1));
    if (std::abs(g(0, 0)) < 1e-2 * max1 || std::abs(g(1, 0)) < 1e-2 * max2) continue;
    if (r.norm() < tolerance * g.norm()) return std::make_pair(pos(0), pos(1));
  }
  return std::nullopt;
}

}  // namespace mechsq::meanfield
