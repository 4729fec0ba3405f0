#include <doctest.h>

#include <cmath>

#include "mechsq/protocols.hpp"

using namespace mechsq;
namespace pr = mechsq::protocols;

namespace {

SystemParams setup1_params(double gamma_m, double n_th, double chi1 = 0.01, double phi = 0.0) {
  SystemParams p;
  p.kappa = 0.05;
  p.gamma_m = gamma_m;
  p.n_th = n_th;
  p.g = 1e-4;
  p.delta = p.omega_m;
  p.pump = pr::setup1_drives(p.g, chi1, 0.03, phi, p.kappa, p.omega_m);
  return p;
}

pr::ProtocolRequest rwa_request(double t_end) {
  pr::ProtocolRequest req;
  req.params = setup1_params(1e-4, 0.0);
  req.t_end = t_end;
  req.n_points = 3;
  return req;
}

}  // namespace

TEST_CASE("setup names round trip") {
  for (auto s : {pr::Setup::setup1_rwa, pr::Setup::setup1_full, pr::Setup::setup2}) {
    CHECK(pr::parse_setup(pr::to_string(s)) == s);
  }
  CHECK_THROWS_AS(pr::parse_setup("setup3"), PreconditionError);
}

TEST_CASE("setup I reaches the analytic steady state") {
  const auto res = pr::run_setup1(setup1_params(1e-4, 0.0), 3000.0, 4);
  CHECK(res.final_epr_min() == doctest::Approx(res.prediction.epr_min).epsilon(1e-6));
  CHECK(res.prediction.epr_min == doctest::Approx(1.003552).epsilon(1e-5));
  CHECK(res.times.size() == 4);
  CHECK(res.epr_min_series.front() == doctest::Approx(2.0));
  CHECK(res.occupations.back()[0] == doctest::Approx(res.occupations.back()[1]));
}

TEST_CASE("setup I near the thermal threshold") {
  const auto res = pr::run_setup1(setup1_params(1e-4, 70.0), 3000.0, 2);
  CHECK(res.final_epr_min() == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("setup I rejects broken symmetry") {
  auto p = setup1_params(0.0, 0.0);
  p.pump[1].phi1 += 0.3;
  CHECK_THROWS_WITH_AS(pr::run_setup1(p, 10.0, 2), doctest::Contains("condition violated"), PreconditionError);
  auto q = setup1_params(0.0, 0.0);
  q.pump[1].e1 *= 1.1;
  CHECK_THROWS_WITH_AS(pr::run_setup1(q, 10.0, 2), doctest::Contains("r1 = r2"), PreconditionError);
  auto off = setup1_params(0.0, 0.0);
  off.delta = 0.9;
  CHECK_THROWS_AS(pr::run_setup1(off, 10.0, 2), PreconditionError);
  CHECK_THROWS_AS(pr::run_setup1(setup1_params(0.0, 0.0, 0.03), 10.0, 2), StabilityError);
}

TEST_CASE("without cavity cooling the mechanics thermalise") {
  auto p = setup1_params(1e-2, 2.0);
  p.kappa = 0.0;
  p.pump = pr::setup1_drives(p.g, 0.01, 0.03, 0.0, p.kappa, p.omega_m);
  const auto res = pr::run_setup1(p, 6000.0, 2);
  CHECK(res.final_epr_min() == doctest::Approx(2.0 * (2.0 * 2.0 + 1.0)).epsilon(1e-6));
}

TEST_CASE("lab frame with vanishing coupling stays thermal") {
  const auto p = setup1_params(1e-2, 1.5, 0.0);
  auto weak = p;
  for (auto& d : weak.pump) d.e2 *= 1e-6;
  const auto res = pr::run_setup1_full(weak, 800.0, 3);
  REQUIRE(res.late_time_epr_average);
  CHECK(*res.late_time_epr_average == doctest::Approx(2.0 * (2.0 * 1.5 + 1.0)).epsilon(1e-4));
  CHECK(res.regime == "lab_frame");
}

TEST_CASE("two-step schedule") {
  SystemParams p;
  p.kappa = 0.05;
  p.j12 = 3.0;
  p.delta = 1.0;
  p.g = 1e-4;
  p.pump = {pr::setup1_drives(p.g, 0.01, 0.03, 0.2, p.kappa, p.omega_m).front()};
  const auto s = pr::make_two_step_schedule(p);
  CHECK(s.t_switch == doctest::Approx(3.0 * 80.0));
  CHECK(s.step1.detuning == doctest::Approx(p.omega_m - p.j12));
  CHECK(s.step2.detuning == doctest::Approx(p.omega_m + p.j12));
  CHECK(s.step2.t_start == doctest::Approx(s.t_switch));
  CHECK(std::abs(std::remainder(s.step2.coupling.phi - s.step1.coupling.phi - kPi, kTwoPi)) < 1e-12);
  CHECK(s.step2.coupling.chi1 == doctest::Approx(s.step1.coupling.chi1));
  const auto rev = pr::make_two_step_schedule(p, 50.0, 1.0, pr::StepOrder::d2_first);
  CHECK(rev.t_switch == 50.0);
  CHECK(rev.step1.detuning == doctest::Approx(p.omega_m + p.j12));
  CHECK(pr::make_two_step_schedule(p, 0.0, 1.0).t_switch == doctest::Approx(80.0));
}

TEST_CASE("setup II") {
  SystemParams p;
  p.kappa = 0.05;
  p.j12 = 3.0;
  p.g = 1e-4;
  p.pump = {pr::setup1_drives(p.g, 0.01, 0.03, 0.0, p.kappa, p.omega_m).front()};

  SUBCASE("tunnelling sign is a relabelling") {
    const auto a = pr::run_setup2(p, pr::make_two_step_schedule(p, 20.0), 40.0, 3);
    auto q = p;
    q.j12 = -3.0;
    const auto b = pr::run_setup2(q, pr::make_two_step_schedule(q, 20.0, 1.0, pr::StepOrder::d2_first), 40.0, 3);
    CHECK(a.final_epr_min() == doctest::Approx(b.final_epr_min()).epsilon(1e-6));
    CHECK(a.warnings.empty());
    CHECK(a.regime == "two_step_efficient");
  }
  SUBCASE("validity warning near the tunnelling resonance") {
    p.j12 = 1.1;
    const auto res = pr::run_setup2(p, pr::make_two_step_schedule(p, 5.0), 10.0, 2);
    REQUIRE(res.warnings.size() == 1);
    CHECK(res.warnings[0].find("validity") != std::string::npos);
  }
  SUBCASE("needs tunnelling") {
    p.j12 = 0.0;
    CHECK_THROWS_AS(pr::run_setup2(p, pr::make_two_step_schedule(p, 5.0), 10.0, 2), PreconditionError);
  }
}

TEST_CASE("sweeps") {
  const auto base = rwa_request(600.0);
  CHECK(pr::sweep(base, "n_th", {}).empty());
  CHECK_THROWS_AS(pr::sweep(base, "nonsense", {1.0}), PreconditionError);

  const std::vector<double> values{0.0, 1.0, 5.0, 10.0};
  const auto serial = pr::sweep(base, "n_th", values, 1);
  const auto parallel = pr::sweep(base, "n_th", values, 3);
  REQUIRE(serial.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(serial[i].value == values[i]);
    CHECK(serial[i].status == "ok");
    CHECK(serial[i].epr_min == parallel[i].epr_min);
    CHECK(serial[i].occupation == parallel[i].occupation);
  }
  CHECK(serial[1].epr_min > serial[0].epr_min);

  const auto chi = pr::sweep(base, "chi1", {0.01, 0.04});
  CHECK(chi[0].status == "ok");
  CHECK(chi[0].epr_min == doctest::Approx(serial[0].epr_min).epsilon(1e-9));
  CHECK(chi[1].status == "unstable");
  CHECK(chi[1].message.find("stability violated") != std::string::npos);
}

TEST_CASE("apply_axis") {
  auto req = rwa_request(10.0);
  pr::apply_axis(req, "kappa", 0.1);
  CHECK(req.params.kappa == 0.1);
  pr::apply_axis(req, "t_end", 20.0);
  CHECK(req.t_end == 20.0);
  CHECK_THROWS_AS(pr::apply_axis(req, "colour", 1.0), PreconditionError);
}
