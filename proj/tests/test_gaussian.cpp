#include <doctest.h>

#include <cmath>
#include <random>

#include "mechsq/gaussian.hpp"

using namespace mechsq;

namespace {

const double kR = std::atanh(1.0 / 3.0);

// Covariance of the two-mode squeezed vacuum written out from
// <c1 c2> = -sinh(2r) e^{i phi} / 2 and <c^dag c> = sinh^2 r.
Matrix tmsv_cov(double r, double phi) {
  const double c = 0.5 * std::cosh(2 * r), s = 0.5 * std::sinh(2 * r);
  Matrix V = Matrix::Zero(4, 4);
  V.diagonal().setConstant(c);
  V(0, 2) = V(2, 0) = -s * std::cos(phi);
  V(1, 3) = V(3, 1) = s * std::cos(phi);
  V(0, 3) = V(3, 0) = -s * std::sin(phi);
  V(1, 2) = V(2, 1) = -s * std::sin(phi);
  return V;
}

double epr_direct(const Matrix& V, double t1, double t2) {
  Vector u(4), w(4);
  u << std::cos(t1), std::sin(t1), std::cos(t2), std::sin(t2);
  w << -std::sin(t1), std::cos(t1), std::sin(t2), -std::cos(t2);
  return u.dot(V * u) + w.dot(V * w);
}

// Minimum over the local phases: the variance depends on t1 + t2 only.
double epr_min_closed(const Matrix& V) {
  const double a = V(0, 2), b = V(0, 3), c = V(1, 2), d = V(1, 3);
  return V.trace() - 2.0 * std::hypot(a - d, b + c);
}

GaussianState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GaussianState s = direct_sum(thermal(1, 2.0 * u(rng)), single_mode_squeezed_vacuum(SqueezingParams::make(u(rng), 6 * u(rng))));
  s = apply_symplectic(two_mode_squeezer(SqueezingParams::make(u(rng), 6 * u(rng))), s);
  return apply_symplectic(beam_splitter_matrix(), s);
}

}  // namespace

TEST_CASE("vacuum and thermal states") {
  CHECK(vacuum(1).cov().isApprox(0.5 * Matrix::Identity(2, 2)));
  CHECK(vacuum(2).mean().isZero());
  CHECK(heisenberg_margin(vacuum(2)) == doctest::Approx(0.0).epsilon(1e-15));
  const auto th = thermal(1, 2.0);
  CHECK(mode_occupation(th, 0) == doctest::Approx(2.0));
  CHECK(purity(th) == doctest::Approx(0.2));
  CHECK(mode_occupation(vacuum(1), 0) == doctest::Approx(0.0));
  CHECK(purity(vacuum(2)) == doctest::Approx(1.0));
}

TEST_CASE("state construction rejects bad input") {
  CHECK_THROWS_AS(GaussianState(Vector::Zero(3), Matrix::Identity(3, 3)), PreconditionError);
  CHECK_THROWS_AS(GaussianState(Vector::Zero(2), Matrix::Identity(4, 4)), PreconditionError);
  CHECK_THROWS_AS(SqueezingParams::make(-0.1, 0.0), PreconditionError);
  CHECK(SqueezingParams::make(0.2, -1.0).phi == doctest::Approx(kTwoPi - 1.0));
}

TEST_CASE("apply_symplectic") {
  const auto sq = single_mode_squeezed_vacuum(SqueezingParams::make(0.7, 1.1));
  CHECK(apply_symplectic(Matrix::Identity(2, 2), sq).cov().isApprox(sq.cov()));
  CHECK(apply_symplectic(rotation_matrix(kPi), vacuum(1)).cov().isApprox(vacuum(1).cov()));

  const Matrix S = single_mode_squeezer(SqueezingParams::make(0.7, 1.1));
  const auto back = apply_symplectic(S.inverse(), apply_symplectic(S, vacuum(1)));
  CHECK((back.cov() - vacuum(1).cov()).cwiseAbs().maxCoeff() < 1e-12);

  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = 2.0;
  CHECK_THROWS_AS(apply_symplectic(bad, vacuum(1)), PreconditionError);
}

TEST_CASE("single-mode squeezed vacuum") {
  CHECK(single_mode_squeezed_vacuum(SqueezingParams::make(0.0, 0.0)).cov().isApprox(vacuum(1).cov()));
  const auto s = single_mode_squeezed_vacuum(SqueezingParams::make(kR, 0.0));
  Eigen::SelfAdjointEigenSolver<Matrix> es(s.cov());
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.25));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
  CHECK(mode_occupation(s, 0) == doctest::Approx(0.125));
  CHECK(squeeze_parameter(s, 0) == doctest::Approx(kR));
  CHECK(purity(s) == doctest::Approx(1.0));
}

TEST_CASE("two-mode squeezed vacuum matches the closed form") {
  for (double phi : {0.0, 0.4, 2.5, 5.9}) {
    const auto s = two_mode_squeezed_vacuum(SqueezingParams::make(kR, phi));
    CHECK((s.cov() - tmsv_cov(kR, phi)).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(two_mode_squeezed_vacuum(SqueezingParams::make(0.0, 0.0)).cov().isApprox(vacuum(2).cov()));
  const auto s = two_mode_squeezed_vacuum(SqueezingParams::make(kR, 0.0));
  CHECK(mode_occupation(s, 0) == doctest::Approx(0.125));
  CHECK(mode_occupation(s, 1) == doctest::Approx(0.125));
  CHECK(purity(s) == doctest::Approx(1.0));
  CHECK(epr_min(s).value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("beam splitter on perpendicular squeezers gives the two-mode squeezed vacuum") {
  for (double phi : {0.0, 1.0, 3.0}) {
    const auto in = direct_sum(single_mode_squeezed_vacuum(SqueezingParams::make(kR, phi)),
                               single_mode_squeezed_vacuum(SqueezingParams::make(kR, phi - kPi)));
    const auto out = beam_splitter_5050(in);
    CHECK((out.cov() - tmsv_cov(kR, phi)).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(beam_splitter_5050(vacuum(2)).cov().isApprox(vacuum(2).cov()));
  CHECK_THROWS_AS(beam_splitter_5050(vacuum(3)), PreconditionError);
}

TEST_CASE("EPR variance") {
  CHECK(epr_variance(vacuum(2), 0.3, 1.7) == doctest::Approx(2.0));
  const auto s = two_mode_squeezed_vacuum(SqueezingParams::make(kR, 0.0));
  CHECK(epr_variance(s, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(epr_variance(s, 0.0, kPi / 2) == doctest::Approx(2.0 * std::cosh(2 * kR)));
  CHECK(epr_variance(s, 0.0, kPi) == doctest::Approx(2.0 * std::exp(2 * kR)));
  CHECK(epr_min(thermal(2, 3.0)).value == doctest::Approx(14.0));
}

TEST_CASE("epr_min phase sum equals the squeezing phase") {
  for (double phi : {0.3, 1.9, 4.4}) {
    const auto m = epr_min(two_mode_squeezed_vacuum(SqueezingParams::make(0.5, phi)));
    CHECK(std::abs(std::remainder(m.theta1 + m.theta2 - phi, kTwoPi)) < 1e-6);
  }
}

TEST_CASE("property: epr functions agree with direct evaluation on random states") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  for (int k = 0; k < 50; ++k) {
    const auto s = random_state(rng);
    const double t1 = angle(rng), t2 = angle(rng);
    CHECK(epr_variance(s, t1, t2) == doctest::Approx(epr_direct(s.cov(), t1, t2)).epsilon(1e-12));
    const auto m = epr_min(s);
    CHECK(m.value == doctest::Approx(epr_min_closed(s.cov())).epsilon(1e-9));
    CHECK(epr_variance(s, m.theta1, m.theta2) == doctest::Approx(m.value).epsilon(1e-12));
  }
}

TEST_CASE("property: Heisenberg bound and purity under symplectic maps") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto s = random_state(rng);
    CHECK(satisfies_uncertainty(s));
    CHECK(purity(s) > 0.0);
    CHECK(purity(s) <= 1.0 + 1e-12);
    const double before = purity(s);
    const auto t = apply_symplectic(two_mode_squeezer(SqueezingParams::make(0.8, 2.0)), s);
    CHECK(purity(t) == doctest::Approx(before).epsilon(1e-10));
    CHECK(satisfies_uncertainty(t));
  }
}

TEST_CASE("property: beam splitter is an involution") {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const auto s = random_state(rng);
    const auto twice = beam_splitter_5050(beam_splitter_5050(s));
    CHECK((twice.cov() - s.cov()).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("property: standard operations are symplectic") {
  const Matrix omega = symplectic_form(2);
  for (const Matrix& S : {two_mode_squeezer(SqueezingParams::make(0.9, 1.3)), beam_splitter_matrix()}) {
    CHECK((S * omega * S.transpose() - omega).norm() < 1e-12);
  }
  const Matrix omega1 = symplectic_form(1);
  const Matrix S1 = single_mode_squeezer(SqueezingParams::make(1.2, 0.4));
  CHECK((S1 * omega1 * S1.transpose() - omega1).norm() < 1e-12);
}

TEST_CASE("moments round trip") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto s0 = random_state(rng);
    Vector mean(4);
    mean << 0.3, -1.0, 2.0, 0.5;
    const GaussianState s(mean, s0.cov());
    const auto back = state_from_moments(mode_moments(s));
    CHECK((back.cov() - s.cov()).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((back.mean() - s.mean()).cwiseAbs().maxCoeff() < 1e-13);
  }
  const auto m = mode_moments(two_mode_squeezed_vacuum(SqueezingParams::make(kR, 0.7)));
  CHECK(std::abs(m.anomalous(0, 1) - std::polar(-0.5 * std::sinh(2 * kR), 0.7)) < 1e-14);
  CHECK(m.normal(0, 0).real() == doctest::Approx(0.125));
}

TEST_CASE("occupation includes the coherent amplitude") {
  Vector mean(2);
  mean << std::sqrt(2.0) * 3.0, 0.0;
  const GaussianState coherent(mean, vacuum(1).cov());
  CHECK(mode_occupation(coherent, 0) == doctest::Approx(9.0));
}

TEST_CASE("marginal and direct sum") {
  const auto a = single_mode_squeezed_vacuum(SqueezingParams::make(0.3, 0.0));
  const auto b = thermal(1, 1.5);
  const auto joint = direct_sum(a, b);
  const int second[] = {1};
  const int swapped[] = {1, 0};
  CHECK(joint.marginal(second).cov().isApprox(b.cov()));
  CHECK(joint.marginal(swapped).marginal(second).cov().isApprox(a.cov()));
  const int bad[] = {2};
  CHECK_THROWS_AS(joint.marginal(bad), PreconditionError);
}
