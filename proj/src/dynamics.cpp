#include "mechsq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mechsq/ode.hpp"

namespace mechsq {

void SystemParams::validate() const {
  if (!(omega_m > 0.0)) throw PreconditionError("omega_m must be > 0");
  if (!(kappa >= 0.0) || !(gamma_m >= 0.0)) throw PreconditionError("damping rates must be >= 0");
  if (!(n_th >= 0.0)) throw PreconditionError("n_th must be >= 0");
  for (const auto& d : pump) {
    if (!(d.e1 >= 0.0) || !(d.e2 >= 0.0)) throw PreconditionError("pump amplitudes must be >= 0");
  }
}

LinearDynamics::LinearDynamics(Matrix drift, Matrix diffusion)
    : LinearDynamics(std::move(drift), {}, std::move(diffusion), std::nullopt) {}

LinearDynamics::LinearDynamics(Matrix static_drift, std::vector<Term> terms, Matrix diffusion,
                               std::optional<double> period)
    : static_drift_(std::move(static_drift)),
      terms_(std::move(terms)),
      diffusion_(std::move(diffusion)),
      period_(period) {
  const auto dim = diffusion_.rows();
  if (dim == 0 || dim % 2 != 0 || diffusion_.cols() != dim) throw PreconditionError("diffusion must be 2N x 2N");
  if (static_drift_.rows() != dim || static_drift_.cols() != dim) throw PreconditionError("drift must be 2N x 2N");
  for (const auto& term : terms_) {
    if (term.generator.rows() != dim || term.generator.cols() != dim || !term.coefficient) {
      throw PreconditionError("malformed time-dependent drift term");
    }
  }
  if ((diffusion_ - diffusion_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("diffusion matrix must be symmetric");
  }
  diffusion_ = 0.5 * (diffusion_ + diffusion_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(diffusion_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-12) throw PreconditionError("diffusion matrix must be PSD");
  if (period_ && !(*period_ > 0.0)) throw PreconditionError("period must be > 0");
}

Matrix LinearDynamics::drift_at(double t) const {
  Matrix A = static_drift_;
  for (const auto& term : terms_) A += term.coefficient(t) * term.generator;
  return A;
}

namespace {

const Complex kI(0.0, 1.0);

// Quadrature drift of H = sum h_jk c_j^dag c_k + 1/2 sum (K_jk c_j^dag c_k^dag + h.c.),
// from dc/dt = -i (h c + K c^dag).
Matrix hamiltonian_drift(const CMatrix& h, const CMatrix& K) { return quadrature_map(-kI * h, -kI * K); }

void add_damping(Matrix& A, Matrix& D, int mode, double rate, double occupation) {
  A.block<2, 2>(2 * mode, 2 * mode) -= 0.5 * rate * Eigen::Matrix2d::Identity();
  D.block<2, 2>(2 * mode, 2 * mode) += rate * (occupation + 0.5) * Eigen::Matrix2d::Identity();
}

// Lab-frame quadratic model whose Hamiltonian is affine in chi and chi*.
// `fill(h, K, chi)` writes the full Hamiltonian for a given coupling value.
template <class Fill>
LinearDynamics affine_coupling_model(int n_modes, const CouplingProfile& profile, Fill fill, Matrix A_damp,
                                     Matrix D) {
  auto drift_for = [&](Complex chi) {
    CMatrix h = CMatrix::Zero(n_modes, n_modes);
    CMatrix K = CMatrix::Zero(n_modes, n_modes);
    fill(h, K, chi);
    return hamiltonian_drift(h, K);
  };
  const Matrix A0 = drift_for(0.0);
  const Matrix A_re = drift_for(1.0) - A0;
  const Matrix A_im = drift_for(kI) - A0;

  if (profile.chi1 == 0.0 || profile.omega_mod == 0.0) {
    const Complex chi = profile.at(0.0);
    return LinearDynamics(A0 + A_damp + chi.real() * A_re + chi.imag() * A_im, std::move(D));
  }
  std::vector<LinearDynamics::Term> terms;
  terms.push_back({A_re, [profile](double t) { return profile.at(t).real(); }});
  terms.push_back({A_im, [profile](double t) { return profile.at(t).imag(); }});
  return LinearDynamics(A0 + A_damp, std::move(terms), std::move(D), kTwoPi / std::abs(profile.omega_mod));
}

}  // namespace

LinearDynamics build_rwa_model(const CouplingProfile& profile, double kappa, double gamma_m, double n_th) {
  if (!(kappa >= 0.0) || !(gamma_m >= 0.0) || !(n_th >= 0.0)) {
    throw PreconditionError("rates and n_th must be >= 0");
  }
  CMatrix h = CMatrix::Zero(2, 2);
  CMatrix K = CMatrix::Zero(2, 2);
  h(0, 1) = h(1, 0) = profile.chi2;
  K(0, 1) = K(1, 0) = std::polar(profile.chi1, profile.phi);
  Matrix A = hamiltonian_drift(h, K);
  Matrix D = Matrix::Zero(4, 4);
  add_damping(A, D, 0, kappa, 0.0);
  add_damping(A, D, 1, gamma_m, n_th);
  return LinearDynamics(std::move(A), std::move(D));
}

LinearDynamics build_full_model(const CouplingProfile& profile, double delta, double omega_m, double kappa,
                                double gamma_m, double n_th) {
  if (!(kappa >= 0.0) || !(gamma_m >= 0.0) || !(n_th >= 0.0)) {
    throw PreconditionError("rates and n_th must be >= 0");
  }
  Matrix A_damp = Matrix::Zero(4, 4);
  Matrix D = Matrix::Zero(4, 4);
  add_damping(A_damp, D, 0, kappa, 0.0);
  add_damping(A_damp, D, 1, gamma_m, n_th);
  auto fill = [&](CMatrix& h, CMatrix& K, Complex chi) {
    h(0, 0) = delta;
    h(1, 1) = omega_m;
    h(0, 1) = chi;
    h(1, 0) = std::conj(chi);
    K(0, 1) = K(1, 0) = chi;
  };
  return affine_coupling_model(2, profile, fill, std::move(A_damp), std::move(D));
}

TwoCavityModel build_two_cavity_model(const SystemParams& params, const CouplingProfile& profile) {
  params.validate();
  Matrix A_damp = Matrix::Zero(8, 8);
  Matrix D = Matrix::Zero(8, 8);
  for (int j = 0; j < 2; ++j) {
    add_damping(A_damp, D, j, params.kappa, 0.0);
    add_damping(A_damp, D, 2 + j, params.gamma_m, params.n_th);
  }
  auto fill = [&](CMatrix& h, CMatrix& K, Complex chi) {
    h(0, 1) = h(1, 0) = params.j12;
    for (int j = 0; j < 2; ++j) {
      h(j, j) = params.delta;
      h(2 + j, 2 + j) = params.omega_m;
      h(j, 2 + j) = chi;
      h(2 + j, j) = std::conj(chi);
      K(j, 2 + j) = K(2 + j, j) = chi;
    }
  };
  return {affine_coupling_model(4, profile, fill, std::move(A_damp), std::move(D)),
          build_full_model(profile, params.delta + params.j12, params.omega_m, params.kappa, params.gamma_m,
                           params.n_th),
          build_full_model(profile, params.delta - params.j12, params.omega_m, params.kappa, params.gamma_m,
                           params.n_th)};
}

Matrix two_cavity_normal_mode_map() {
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix U = CMatrix::Zero(4, 4);
  U(0, 0) = s, U(0, 1) = s;   // d1
  U(1, 2) = s, U(1, 3) = s;   // b1
  U(2, 0) = s, U(2, 1) = -s;  // d2
  U(3, 2) = s, U(3, 3) = -s;  // b2
  return quadrature_map(U, CMatrix::Zero(4, 4));
}

Trajectory evolve(const LinearDynamics& dyn, const GaussianState& state, double t0, std::span<const double> grid) {
  if (state.n_modes() != dyn.n_modes()) throw PreconditionError("state and dynamics mode counts differ");
  const Eigen::Index dim = 2 * dyn.n_modes();
  ode::State x(dim + dim * dim);
  Eigen::Map<Vector>(x.data(), dim) = state.mean();
  Eigen::Map<Matrix>(x.data() + dim, dim, dim) = state.cov();

  const bool constant = !dyn.is_time_dependent();
  const Matrix A_const = constant ? dyn.drift_at(0.0) : Matrix();
  const Matrix& D = dyn.diffusion();
  Matrix A(dim, dim), AV(dim, dim);
  auto rhs = [&](const ode::State& y, ode::State& dydt, double t) {
    if (!constant) A = dyn.drift_at(t);
    const Matrix& Am = constant ? A_const : A;
    Eigen::Map<const Vector> mu(y.data(), dim);
    Eigen::Map<const Matrix> V(y.data() + dim, dim, dim);
    Eigen::Map<Vector>(dydt.data(), dim).noalias() = Am * mu;
    AV.noalias() = Am * V;
    Eigen::Map<Matrix>(dydt.data() + dim, dim, dim) = AV + AV.transpose() + D;
  };

  Trajectory out;
  out.times.assign(grid.begin(), grid.end());
  out.states.reserve(grid.size());
  auto observe = [&](std::size_t, const ode::State& y) {
    out.states.emplace_back(Eigen::Map<const Vector>(y.data(), dim), Eigen::Map<const Matrix>(y.data() + dim, dim, dim));
  };
  ode::integrate(rhs, std::move(x), t0, grid, ode::Tolerances{1e-9, 1e-12}, observe);
  return out;
}

std::vector<Complex> stability_eigenvalues(const LinearDynamics& dyn) {
  if (dyn.is_time_dependent()) throw PreconditionError("stability eigenvalues need a constant drift");
  Eigen::EigenSolver<Matrix> solver(dyn.drift_at(0.0), false);
  const auto ev = solver.eigenvalues();
  std::vector<Complex> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

double spectral_abscissa(const LinearDynamics& dyn) { return stability_eigenvalues(dyn).front().real(); }

GaussianState steady_state(const LinearDynamics& dyn) {
  if (dyn.is_time_dependent()) throw PreconditionError("steady_state needs a constant drift");
  const auto eigen = stability_eigenvalues(dyn);
  if (eigen.front().real() >= -1e-13) {
    std::ostringstream msg;
    msg << "drift is not Hurwitz: eigenvalue " << eigen.front().real() << (eigen.front().imag() >= 0 ? "+" : "")
        << eigen.front().imag() << "i";
    throw StabilityError(msg.str(), eigen.front());
  }
  const Matrix A = dyn.drift_at(0.0);
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix L(n * n, n * n);
  // vec(A V + V A^T) = (I (x) A + A (x) I) vec(V), column-major vec
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      L.block(i * n, j * n, n, n) = I(i, j) * A + A(i, j) * I;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(dyn.diffusion().data(), n * n);
  const Vector v = L.partialPivLu().solve(rhs);
  return {Vector::Zero(n), Eigen::Map<const Matrix>(v.data(), n, n)};
}

}  // namespace mechsq
