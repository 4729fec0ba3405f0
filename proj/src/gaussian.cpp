#include "mechsq/gaussian.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/tools/minima.hpp>

namespace mechsq {

SqueezingParams SqueezingParams::make(double r, double phi) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw PreconditionError("squeeze magnitude must be finite and >= 0");
  }
  double reduced = std::fmod(phi, kTwoPi);
  if (reduced < 0.0) reduced += kTwoPi;
  if (reduced >= kTwoPi) reduced = 0.0;
  return {r, reduced};
}

GaussianState::GaussianState(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0 || mean_.size() % 2 != 0) {
    throw PreconditionError("mean vector must have positive even length");
  }
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw PreconditionError("covariance dimension does not match mean vector");
  }
  if (!cov_.allFinite() || !mean_.allFinite()) {
    throw PreconditionError("state contains non-finite entries");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

GaussianState GaussianState::marginal(std::span<const int> modes) const {
  const auto k = static_cast<Eigen::Index>(modes.size());
  if (k == 0) throw PreconditionError("marginal needs at least one mode");
  Vector m(2 * k);
  Matrix c(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int mi = modes[i];
    if (mi < 0 || mi >= n_modes()) throw PreconditionError("mode index out of range");
    m.segment<2>(2 * i) = mean_.segment<2>(2 * mi);
    for (Eigen::Index j = 0; j < k; ++j) {
      c.block<2, 2>(2 * i, 2 * j) = cov_.block<2, 2>(2 * mi, 2 * modes[j]);
    }
  }
  return {std::move(m), std::move(c)};
}

GaussianState direct_sum(const GaussianState& first, const GaussianState& second) {
  const auto n1 = first.mean().size();
  const auto n2 = second.mean().size();
  Vector m(n1 + n2);
  m << first.mean(), second.mean();
  Matrix c = Matrix::Zero(n1 + n2, n1 + n2);
  c.topLeftCorner(n1, n1) = first.cov();
  c.bottomRightCorner(n2, n2) = second.cov();
  return {std::move(m), std::move(c)};
}

ModeMoments mode_moments(const GaussianState& state) {
  const int n = state.n_modes();
  const Matrix& V = state.cov();
  ModeMoments out{CVector(n), CMatrix(n, n), CMatrix(n, n)};
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    out.mean(j) = Complex(s * state.mean()(2 * j), s * state.mean()(2 * j + 1));
    for (int k = 0; k < n; ++k) {
      const double xx = V(2 * j, 2 * k), pp = V(2 * j + 1, 2 * k + 1);
      const double xp = V(2 * j, 2 * k + 1), px = V(2 * j + 1, 2 * k);
      out.normal(j, k) = Complex(0.5 * (xx + pp) - (j == k ? 0.5 : 0.0), 0.5 * (xp - px));
      out.anomalous(j, k) = Complex(0.5 * (xx - pp), 0.5 * (xp + px));
    }
  }
  return out;
}

GaussianState state_from_moments(const ModeMoments& moments) {
  const auto n = moments.mean.size();
  if (moments.normal.rows() != n || moments.normal.cols() != n || moments.anomalous.rows() != n ||
      moments.anomalous.cols() != n) {
    throw PreconditionError("moment matrices must be N x N");
  }
  Vector mean(2 * n);
  Matrix V(2 * n, 2 * n);
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    mean(2 * j) = r2 * moments.mean(j).real();
    mean(2 * j + 1) = r2 * moments.mean(j).imag();
    for (Eigen::Index k = 0; k < n; ++k) {
      const Complex N = moments.normal(j, k);
      const Complex M = moments.anomalous(j, k);
      const double delta = (j == k) ? 0.5 : 0.0;
      V(2 * j, 2 * k) = M.real() + N.real() + delta;
      V(2 * j + 1, 2 * k + 1) = -M.real() + N.real() + delta;
      V(2 * j, 2 * k + 1) = M.imag() + N.imag();
      V(2 * j + 1, 2 * k) = M.imag() - N.imag();
    }
  }
  return {std::move(mean), std::move(V)};
}

Matrix symplectic_form(int n_modes) {
  Matrix omega = Matrix::Zero(2 * n_modes, 2 * n_modes);
  for (int j = 0; j < n_modes; ++j) {
    omega(2 * j, 2 * j + 1) = 1.0;
    omega(2 * j + 1, 2 * j) = -1.0;
  }
  return omega;
}

Matrix quadrature_map(const CMatrix& U, const CMatrix& W) {
  const auto n = U.rows();
  const CMatrix plus = U + W;
  const CMatrix minus = U - W;
  Matrix S(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      S(2 * j, 2 * k) = plus(j, k).real();
      S(2 * j, 2 * k + 1) = -minus(j, k).imag();
      S(2 * j + 1, 2 * k) = plus(j, k).imag();
      S(2 * j + 1, 2 * k + 1) = minus(j, k).real();
    }
  }
  return S;
}

double heisenberg_margin(const GaussianState& state) {
  const CMatrix H = state.cov().cast<Complex>() + Complex(0.0, 0.5) * symplectic_form(state.n_modes()).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(H, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool satisfies_uncertainty(const GaussianState& state, double tol) { return heisenberg_margin(state) >= -tol; }

GaussianState vacuum(int n_modes) {
  if (n_modes < 1) throw PreconditionError("vacuum needs n_modes >= 1");
  return {Vector::Zero(2 * n_modes), 0.5 * Matrix::Identity(2 * n_modes, 2 * n_modes)};
}

GaussianState thermal(int n_modes, double occupation) {
  if (n_modes < 1) throw PreconditionError("thermal state needs n_modes >= 1");
  if (!(occupation >= 0.0)) throw PreconditionError("thermal occupation must be >= 0");
  return {Vector::Zero(2 * n_modes), (occupation + 0.5) * Matrix::Identity(2 * n_modes, 2 * n_modes)};
}

GaussianState apply_symplectic(const Matrix& S, const GaussianState& state) {
  const auto dim = state.mean().size();
  if (S.rows() != dim || S.cols() != dim) throw PreconditionError("symplectic matrix has wrong dimension");
  const Matrix omega = symplectic_form(state.n_modes());
  const double defect = (S * omega * S.transpose() - omega).norm();
  if (!(defect <= 1e-9)) {
    std::ostringstream msg;
    msg << "matrix is not symplectic: ||S Omega S^T - Omega|| = " << defect;
    throw PreconditionError(msg.str());
  }
  return {S * state.mean(), S * state.cov() * S.transpose()};
}

Matrix rotation_matrix(double theta) {
  CMatrix U(1, 1);
  U(0, 0) = std::polar(1.0, -theta);
  return quadrature_map(U, CMatrix::Zero(1, 1));
}

Matrix single_mode_squeezer(const SqueezingParams& params) {
  CMatrix U(1, 1), W(1, 1);
  U(0, 0) = std::cosh(params.r);
  W(0, 0) = -std::polar(std::sinh(params.r), params.phi);
  return quadrature_map(U, W);
}

Matrix two_mode_squeezer(const SqueezingParams& params) {
  CMatrix U = std::cosh(params.r) * CMatrix::Identity(2, 2);
  CMatrix W = CMatrix::Zero(2, 2);
  W(0, 1) = W(1, 0) = -std::polar(std::sinh(params.r), params.phi);
  return quadrature_map(U, W);
}

Matrix beam_splitter_matrix() {
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix U(2, 2);
  U << s, s, s, -s;
  return quadrature_map(U, CMatrix::Zero(2, 2));
}

GaussianState single_mode_squeezed_vacuum(const SqueezingParams& params) {
  return apply_symplectic(single_mode_squeezer(params), vacuum(1));
}

GaussianState two_mode_squeezed_vacuum(const SqueezingParams& params) {
  return apply_symplectic(two_mode_squeezer(params), vacuum(2));
}

GaussianState beam_splitter_5050(const GaussianState& state) {
  if (state.n_modes() != 2) throw PreconditionError("beam splitter acts on exactly 2 modes");
  return apply_symplectic(beam_splitter_matrix(), state);
}

namespace {

void require_two_modes(const GaussianState& state) {
  if (state.n_modes() != 2) throw PreconditionError("EPR variance needs a 2-mode state");
}

}  // namespace

double epr_variance(const GaussianState& state, double theta1, double theta2) {
  require_two_modes(state);
  const double c1 = std::cos(theta1), s1 = std::sin(theta1);
  const double c2 = std::cos(theta2), s2 = std::sin(theta2);
  Eigen::Vector4d u(c1, s1, c2, s2);
  Eigen::Vector4d w(-s1, c1, s2, -c2);
  const Eigen::Matrix4d V = state.cov();
  return std::max(0.0, u.dot(V * u) + w.dot(V * w));
}

EprMinimum epr_min(const GaussianState& state) {
  require_two_modes(state);
  constexpr int kGrid = 64;
  const double step = kTwoPi / kGrid;
  EprMinimum best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double v = epr_variance(state, i * step, j * step);
      if (v < best.value) best = {v, i * step, j * step};
    }
  }

  // Refine along the sum and difference of the local phases.
  constexpr int kBits = std::numeric_limits<double>::digits / 2;
  double sum = best.theta1 + best.theta2;
  double diff = best.theta1 - best.theta2;
  for (int iter = 0; iter < 50; ++iter) {
    const double before = best.value;
    auto along_sum = [&](double s) { return epr_variance(state, 0.5 * (s + diff), 0.5 * (s - diff)); };
    auto [s_opt, v_s] = boost::math::tools::brent_find_minima(along_sum, sum - 2 * step, sum + 2 * step, kBits);
    if (v_s <= best.value) {
      sum = s_opt;
      best.value = v_s;
    }
    auto along_diff = [&](double d) { return epr_variance(state, 0.5 * (sum + d), 0.5 * (sum - d)); };
    auto [d_opt, v_d] = boost::math::tools::brent_find_minima(along_diff, diff - 2 * step, diff + 2 * step, kBits);
    if (v_d <= best.value) {
      diff = d_opt;
      best.value = v_d;
    }
    if (before - best.value < 1e-15) break;
  }
  auto wrap = [](double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
  };
  best.theta1 = wrap(0.5 * (sum + diff));
  best.theta2 = wrap(0.5 * (sum - diff));
  best.value = epr_variance(state, best.theta1, best.theta2);
  return best;
}

double mode_occupation(const GaussianState& state, int mode) {
  if (mode < 0 || mode >= state.n_modes()) throw PreconditionError("mode index out of range");
  const Matrix& V = state.cov();
  const double x = state.mean()(2 * mode), p = state.mean()(2 * mode + 1);
  return 0.5 * (V(2 * mode, 2 * mode) + V(2 * mode + 1, 2 * mode + 1) - 1.0) + 0.5 * (x * x + p * p);
}

double purity(const GaussianState& state) {
  Eigen::LLT<Matrix> llt(state.cov());
  if (llt.info() != Eigen::Success) throw PreconditionError("covariance is not positive definite");
  // sqrt(det V) = prod diag(L)
  double log_sqrt_det = 0.0;
  for (Eigen::Index i = 0; i < state.cov().rows(); ++i) log_sqrt_det += std::log(llt.matrixL()(i, i));
  return std::exp(-state.n_modes() * std::log(2.0) - log_sqrt_det);
}

double squeeze_parameter(const GaussianState& state, int mode) {
  const int modes[] = {mode};
  const GaussianState m = state.marginal(modes);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(Eigen::Matrix2d(m.cov()), Eigen::EigenvaluesOnly);
  const auto ev = solver.eigenvalues();
  if (!(ev(0) > 0.0)) throw PreconditionError("marginal covariance is not positive definite");
  return 0.25 * std::log(ev(1) / ev(0));
}

}  // namespace mechsq
