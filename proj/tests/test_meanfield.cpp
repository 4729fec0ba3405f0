#include <doctest.h>

#include <cmath>

#include "mechsq/meanfield.hpp"

using namespace mechsq;
namespace mf = mechsq::meanfield;

namespace {

SystemParams resonant(double g, double e1, double e2, double phi1) {
  SystemParams p;
  p.kappa = 0.05;
  p.g = g;
  p.delta = p.omega_m;
  p.pump = {{e1, e2, 2.0, phi1, std::atan(p.omega_m / p.kappa)}};
  return p;
}

// Linear response of a driven damped cavity to E2 e^{i phi2} + E1 e^{-i(Omega t - phi1)}.
Complex linear_alpha(const SystemParams& p, double t) {
  const auto& d = p.pump[0];
  const Complex k0(p.kappa, p.delta);
  const Complex k1(p.kappa, p.delta - d.omega_mod);
  return std::polar(d.e2, d.phi2) / k0 + std::polar(d.e1, d.phi1 - d.omega_mod * t) / k1;
}

}  // namespace

TEST_CASE("uncoupled mean field is the linear cavity response") {
  const auto p = resonant(0.0, 2.0, 3.0, 0.4);
  const auto grid = mf::uniform_grid(400.0, 410.0, 21);
  const auto traj = mf::integrate_meanfield(p, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(traj.alpha[0][i] - linear_alpha(p, grid[i])) < 1e-6);
    CHECK(std::abs(traj.beta[0][i]) == 0.0);
  }
}

TEST_CASE("single tone amplitude") {
  auto p = resonant(0.0, 0.0, 1.5, 0.0);
  p.delta = 0.7;
  const double grid[] = {500.0};
  const auto traj = mf::integrate_meanfield(p, grid);
  CHECK(std::abs(traj.alpha[0][0]) == doctest::Approx(1.5 / std::hypot(0.05, 0.7)).epsilon(1e-7));
}

TEST_CASE("zeroth-order tones agree with the linear response") {
  const auto p = resonant(1e-3, 2.0, 3.0, 0.4);
  const auto tones = mf::perturbative_tones(p, 0);
  for (double t : {0.0, 1.3, 7.7}) {
    CHECK(std::abs(mf::evaluate(tones.alpha0, t) - linear_alpha(p, t)) < 1e-12);
  }
  CHECK(tones.alpha2.size() == 4);
  CHECK(tones.beta1.size() == 3);
}

TEST_CASE("perturbative expansion preconditions") {
  auto p = resonant(1e-3, 2.0, 3.0, 0.0);
  CHECK_THROWS_AS(mf::perturbative_tones(p, 1), PreconditionError);
  auto off = p;
  off.delta = 0.9;
  CHECK_THROWS_AS(mf::perturbative_tones(off, 0), PreconditionError);
  auto phase = p;
  phase.pump[0].phi2 = 0.0;
  CHECK_THROWS_AS(mf::perturbative_tones(phase, 0), PreconditionError);
  auto damped = p;
  damped.gamma_m = 0.5;
  CHECK_THROWS_AS(mf::perturbative_tones(damped, 0), PreconditionError);
}

TEST_CASE("tone fitting recovers known amplitudes") {
  const double freqs[] = {0.0, 2.0, -1.0};
  const Complex amps[] = {{1.0, 0.5}, {-0.3, 0.2}, {0.0, 2.0}};
  std::vector<mf::Tone> tones;
  for (int k = 0; k < 3; ++k) tones.push_back({freqs[k], amps[k]});
  const auto times = mf::uniform_grid(0.0, 20.0, 200);
  std::vector<Complex> values;
  for (double t : times) values.push_back(mf::evaluate(tones, t));
  const auto fit = mf::fit_tones(times, values, freqs);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(fit[k] - amps[k]) < 1e-10);
  CHECK_THROWS_AS(mf::fit_tones(std::span(times).first(2), std::span(values).first(2), freqs), PreconditionError);
}

TEST_CASE("pump phase conditions") {
  const auto ph = mf::phase_conditions(0.05, 1.0, 0.3);
  CHECK(ph.phi12 == doctest::Approx(std::atan(20.0)));
  CHECK(ph.phi12 == doctest::Approx(1.5208).epsilon(1e-4));
  CHECK(ph.phi22 == ph.phi12);
  CHECK(ph.phi21 - ph.phi11 == doctest::Approx(kPi));
  CHECK(mf::phase_conditions(0.0, 1.0, 0.0).phi12 == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(mf::phase_conditions(-0.1, 1.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(mf::phase_conditions(0.05, 0.0, 0.0), PreconditionError);
}

TEST_CASE("effective couplings from the drive") {
  const DriveSpec d{1.0, 3.0, 2.0, 0.0, std::atan(20.0)};
  const auto c = mf::chi_from_drive(0.01, d, 0.05, 1.0);
  CHECK(c.chi1 == doctest::Approx(0.009988).epsilon(1e-4));
  CHECK(c.chi2 == doctest::Approx(3.0 * c.chi1));

  for (double phi : {0.0, 0.8, 4.0}) {
    const auto drive = mf::drive_for_coupling(1e-4, 0.01, 0.03, phi, 0.05, 1.0);
    const auto back = mf::chi_from_drive(1e-4, drive, 0.05, 1.0);
    CHECK(back.chi1 == doctest::Approx(0.01));
    CHECK(back.chi2 == doctest::Approx(0.03));
    CHECK(std::abs(std::remainder(back.phi - phi, kTwoPi)) < 1e-12);
  }
  CHECK_THROWS_AS(mf::chi_from_drive(0.01, {1.0, 3.0, 1.0, 0.0, 0.0}, 0.05, 1.0), PreconditionError);
  CHECK_THROWS_AS(mf::drive_for_coupling(0.0, 0.01, 0.03, 0.0, 0.05, 1.0), PreconditionError);
}

TEST_CASE("membrane response") {
  for (double R : {0.1, 0.5, 0.95}) {
    for (double x = 0.01; x < 1.0; x += 0.07) CHECK(std::abs(mf::membrane_response(R, 2.0, x)) <= 2.0 * R + 1e-12);
    CHECK(mf::membrane_response(R, 2.0, kPi / 4) == doctest::Approx(0.0).epsilon(1e-12));
  }
  mf::MembraneGeometry geom;
  geom.wavenumber = {2.0, 3.0};
  geom.position = {kPi / 4, 0.3};
  const auto g = mf::coupling_from_geometry(geom);
  CHECK(g(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  geom.position = {0.0, 0.3};
  CHECK_THROWS_AS(mf::coupling_from_geometry(geom), PreconditionError);
  geom.position = {0.2, 0.3};
  geom.reflectivity = {1.0, 0.5};
  CHECK_THROWS_AS(mf::coupling_from_geometry(geom), PreconditionError);
}

TEST_CASE("membrane positions for symmetric and antisymmetric couplings") {
  mf::MembraneGeometry geom;
  geom.wavenumber = {7.0, 9.0};
  const auto pos = mf::solve_membrane_positions(geom, 1e-8, 2000);
  REQUIRE(pos);
  CHECK(pos->first > 0.0);
  CHECK(pos->first < geom.length);
  CHECK(pos->second > 0.0);
  CHECK(pos->second < geom.length);
  geom.position = {pos->first, pos->second};
  const auto g = mf::coupling_from_geometry(geom);
  const double scale = g.norm();
  CHECK(scale > 0.0);
  CHECK(std::abs(g(0, 0) - g(0, 1)) < 1e-7 * scale);
  CHECK(std::abs(g(1, 0) + g(1, 1)) < 1e-7 * scale);
  CHECK(std::abs(g(0, 0)) > 1e-3 * scale);
  CHECK(std::abs(g(1, 0)) > 1e-3 * scale);

  geom.wavenumber = {2.0, 2.0};
  CHECK_THROWS_AS(mf::solve_membrane_positions(geom, 1e-8, 100), PreconditionError);
}
