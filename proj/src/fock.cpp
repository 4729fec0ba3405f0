#include "mechsq/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "mechsq/ode.hpp"

namespace mechsq::fock {

namespace {

using Sparse = Eigen::SparseMatrix<Complex>;

constexpr double kLeakLimit = 1e-6;
constexpr double kTraceDrift = 1e-6;

Sparse annihilation(int dim) {
  Sparse op(dim, dim);
  std::vector<Eigen::Triplet<Complex>> entries;
  for (int n = 1; n < dim; ++n) entries.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  op.setFromTriplets(entries.begin(), entries.end());
  return op;
}

Sparse identity(int dim) {
  Sparse op(dim, dim);
  op.setIdentity();
  return op;
}

Sparse kron(const Sparse& A, const Sparse& B) {
  std::vector<Eigen::Triplet<Complex>> entries;
  for (int ka = 0; ka < A.outerSize(); ++ka) {
    for (Sparse::InnerIterator ia(A, ka); ia; ++ia) {
      for (int kb = 0; kb < B.outerSize(); ++kb) {
        for (Sparse::InnerIterator ib(B, kb); ib; ++ib) {
          entries.emplace_back(ia.row() * B.rows() + ib.row(), ia.col() * B.cols() + ib.col(),
                               ia.value() * ib.value());
        }
      }
    }
  }
  Sparse out(A.rows() * B.rows(), A.cols() * B.cols());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

struct Operators {
  Sparse a;
  Sparse b;
};

Operators ladder(int dim_cavity, int dim_mech) {
  return {kron(annihilation(dim_cavity), identity(dim_mech)), kron(identity(dim_cavity), annihilation(dim_mech))};
}

struct Liouvillian {
  Sparse h_eff;
  std::vector<Sparse> jumps;

  // rho is Hermitian, so -i H_eff rho + i rho H_eff^dag = X + X^dag with X = -i H_eff rho,
  // and L rho L^dag = L (L rho)^dag.
  void apply(const CMatrix& raw, Eigen::Map<CMatrix>& out) const {
    const CMatrix rho = 0.5 * (raw + raw.adjoint());
    const CMatrix x = Complex(0.0, -1.0) * (h_eff * rho);
    out = x + x.adjoint();
    for (const Sparse& jump : jumps) {
      const CMatrix left = jump * rho;
      out.noalias() += jump * left.adjoint();
    }
  }
};

Liouvillian make_liouvillian(const CouplingProfile& profile, const Rates& rates, int dim_cavity, int dim_mech) {
  if (!(rates.kappa >= 0.0) || !(rates.gamma_m >= 0.0) || !(rates.n_th >= 0.0)) {
    throw PreconditionError("rates and occupation must be >= 0");
  }
  const auto [a, b] = ladder(dim_cavity, dim_mech);
  const Sparse ad = a.adjoint(), bd = b.adjoint();
  const Complex squeeze = std::polar(profile.chi1, profile.phi);
  Sparse H = profile.chi2 * (ad * b + bd * a);
  H += std::conj(squeeze) * (a * b);
  H += squeeze * (ad * bd);

  Liouvillian L;
  auto add_jump = [&](double rate, const Sparse& op) {
    if (rate <= 0.0) return;
    const Sparse scaled = std::sqrt(rate) * op;
    L.jumps.push_back(scaled);
  };
  add_jump(rates.kappa, a);
  add_jump(rates.gamma_m * (rates.n_th + 1.0), b);
  add_jump(rates.gamma_m * rates.n_th, bd);

  Sparse decay(H.rows(), H.cols());
  for (std::size_t k = 0; k < L.jumps.size(); ++k) decay += Sparse(L.jumps[k].adjoint()) * L.jumps[k];
  L.h_eff = H - Complex(0.0, 0.5) * decay;
  return L;
}

double top_population(const CMatrix& rho, int dim_cavity, int dim_mech) {
  double top_a = 0.0, top_b = 0.0;
  for (int k = 0; k < dim_mech; ++k) {
    const int idx = (dim_cavity - 1) * dim_mech + k;
    top_a += rho(idx, idx).real();
  }
  for (int k = 0; k < dim_cavity; ++k) {
    const int idx = k * dim_mech + dim_mech - 1;
    top_b += rho(idx, idx).real();
  }
  return std::max(top_a, top_b);
}

void check_leak(const CMatrix& rho, int dim_cavity, int dim_mech, double t) {
  const double leak = top_population(rho, dim_cavity, dim_mech);
  if (leak > kLeakLimit) {
    std::ostringstream msg;
    msg << "truncation leak: top Fock level holds " << leak << " at t = " << t << " (limit " << kLeakLimit
        << "); increase the dimension";
    throw TruncationError(msg.str(), leak);
  }
}

DensityOperator finish(CMatrix rho, int dim_cavity, int dim_mech, double t) {
  const Complex tr = rho.trace();
  if (std::abs(tr - 1.0) > kTraceDrift) {
    std::ostringstream msg;
    msg << "trace drifted to " << tr.real() << " at t = " << t;
    throw IntegrationError(msg.str(), t);
  }
  rho = 0.5 * (rho + rho.adjoint().eval());
  rho /= rho.trace().real();
  check_leak(rho, dim_cavity, dim_mech, t);
  return {std::move(rho), dim_cavity, dim_mech};
}

}  // namespace

void FockConfig::validate() const {
  if (dim_cavity < 4 || dim_mech < 4) throw PreconditionError("Fock dimensions must be >= 4");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw PreconditionError("tolerances must be > 0");
  if (!(t_end >= 0.0)) throw PreconditionError("t_end must be >= 0");
}

DensityOperator::DensityOperator(CMatrix rho, int dim_cavity, int dim_mech)
    : rho_(std::move(rho)), dim_cavity_(dim_cavity), dim_mech_(dim_mech) {
  if (dim_cavity < 1 || dim_mech < 1) throw PreconditionError("dimensions must be positive");
  const Eigen::Index d = static_cast<Eigen::Index>(dim_cavity) * dim_mech;
  if (rho_.rows() != d || rho_.cols() != d) throw PreconditionError("density matrix size does not match dims");
}

DensityOperator DensityOperator::vacuum(int dim_cavity, int dim_mech) {
  return fock_state(dim_cavity, dim_mech, 0, 0);
}

DensityOperator DensityOperator::fock_state(int dim_cavity, int dim_mech, int n_a, int n_b) {
  if (n_a < 0 || n_a >= dim_cavity || n_b < 0 || n_b >= dim_mech) throw PreconditionError("Fock level out of range");
  const int d = dim_cavity * dim_mech;
  CMatrix rho = CMatrix::Zero(d, d);
  rho(n_a * dim_mech + n_b, n_a * dim_mech + n_b) = 1.0;
  return {std::move(rho), dim_cavity, dim_mech};
}

DensityOperator DensityOperator::product(int dim_cavity, int dim_mech, int n_a, double n_mech) {
  if (n_a < 0 || n_a >= dim_cavity) throw PreconditionError("Fock level out of range");
  if (!(n_mech >= 0.0)) throw PreconditionError("occupation must be >= 0");
  const int d = dim_cavity * dim_mech;
  CMatrix rho = CMatrix::Zero(d, d);
  const double q = n_mech / (n_mech + 1.0);
  double norm = 0.0, p = 1.0;
  for (int k = 0; k < dim_mech; ++k, p *= q) {
    rho(n_a * dim_mech + k, n_a * dim_mech + k) = p;
    norm += p;
  }
  rho /= norm;
  return {std::move(rho), dim_cavity, dim_mech};
}

double DensityOperator::purity() const { return (rho_ * rho_).trace().real(); }

double DensityOperator::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityOperator::min_eigenvalue() const {
  const CMatrix h = 0.5 * (rho_ + rho_.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

double DensityOperator::top_level_population() const { return top_population(rho_, dim_cavity_, dim_mech_); }

void DensityOperator::check_invariants(double herm_tol, double trace_tol, double eig_tol) const {
  std::ostringstream msg;
  if (const double h = hermiticity_error(); h > herm_tol) msg << "Hermiticity error " << h << "; ";
  if (const double t = std::abs(trace() - 1.0); t > trace_tol) msg << "trace error " << t << "; ";
  if (const double e = min_eigenvalue(); e < -eig_tol) msg << "negative eigenvalue " << e << "; ";
  if (!msg.str().empty()) throw PreconditionError("invalid density operator: " + msg.str());
}

std::vector<DensityOperator> evolve_dm_trajectory(const CouplingProfile& profile, const Rates& rates,
                                                  const FockConfig& cfg, const DensityOperator& rho0,
                                                  std::span<const double> times) {
  cfg.validate();
  if (rho0.dim_cavity() != cfg.dim_cavity || rho0.dim_mech() != cfg.dim_mech) {
    throw PreconditionError("initial state dims do not match the configuration");
  }
  const Liouvillian L = make_liouvillian(profile, rates, cfg.dim_cavity, cfg.dim_mech);
  const Eigen::Index d = static_cast<Eigen::Index>(cfg.dim_cavity) * cfg.dim_mech;

  ode::State x(static_cast<std::size_t>(2 * d * d));
  Eigen::Map<CMatrix>(reinterpret_cast<Complex*>(x.data()), d, d) = rho0.matrix();

  auto rhs = [&](const ode::State& y, ode::State& dydt, double) {
    const Eigen::Map<const CMatrix> rho(reinterpret_cast<const Complex*>(y.data()), d, d);
    Eigen::Map<CMatrix> out(reinterpret_cast<Complex*>(dydt.data()), d, d);
    L.apply(rho, out);
  };
  std::vector<DensityOperator> states;
  states.reserve(times.size());
  auto observe = [&](std::size_t i, const ode::State& y) {
    const Eigen::Map<const CMatrix> rho(reinterpret_cast<const Complex*>(y.data()), d, d);
    states.push_back(finish(rho, cfg.dim_cavity, cfg.dim_mech, times[i]));
  };
  auto guard = [&](const ode::State& y, double t) {
    const Eigen::Map<const CMatrix> rho(reinterpret_cast<const Complex*>(y.data()), d, d);
    check_leak(rho, cfg.dim_cavity, cfg.dim_mech, t);
  };
  ode::integrate(rhs, std::move(x), 0.0, times, {cfg.rtol, cfg.atol}, observe, guard);
  return states;
}

DensityOperator evolve_dm(const CouplingProfile& profile, const Rates& rates, const FockConfig& cfg,
                          const DensityOperator& rho0) {
  const double t[] = {cfg.t_end};
  return std::move(evolve_dm_trajectory(profile, rates, cfg, rho0, t).front());
}

GaussianState moments_from_dm(const DensityOperator& rho) {
  const auto [a, b] = ladder(rho.dim_cavity(), rho.dim_mech());
  const CMatrix& r = rho.matrix();
  const Sparse* ops[] = {&a, &b};
  auto expect = [&](const Sparse& op) { return (op * r).trace(); };

  ModeMoments m;
  m.mean.resize(2);
  m.normal.resize(2, 2);
  m.anomalous.resize(2, 2);
  for (int j = 0; j < 2; ++j) m.mean(j) = expect(*ops[j]);
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const Sparse dag = ops[j]->adjoint();
      m.normal(j, k) = expect(dag * (*ops[k])) - std::conj(m.mean(j)) * m.mean(k);
      m.anomalous(j, k) = expect((*ops[j]) * (*ops[k])) - m.mean(j) * m.mean(k);
    }
  }
  return state_from_moments(m);
}

ConvergenceReport convergence_check(const CouplingProfile& profile, const Rates& rates, const FockConfig& cfg,
                                    double tolerance) {
  ConvergenceReport report;
  report.dim_low = std::min(cfg.dim_cavity, cfg.dim_mech);
  report.dim_high = report.dim_low + 4;
  FockConfig high = cfg;
  high.dim_cavity += 4;
  high.dim_mech += 4;
  try {
    const auto lo = moments_from_dm(
        evolve_dm(profile, rates, cfg, DensityOperator::vacuum(cfg.dim_cavity, cfg.dim_mech)));
    const auto hi = moments_from_dm(
        evolve_dm(profile, rates, high, DensityOperator::vacuum(high.dim_cavity, high.dim_mech)));
    report.max_difference = std::max((lo.mean() - hi.mean()).cwiseAbs().maxCoeff(),
                                      (lo.cov() - hi.cov()).cwiseAbs().maxCoeff());
    report.passed = report.max_difference < tolerance;
    std::ostringstream msg;
    msg << "max moment difference " << report.max_difference << " (tolerance " << tolerance << ")";
    report.message = msg.str();
  } catch (const Error& e) {
    report.passed = false;
    report.max_difference = std::numeric_limits<double>::infinity();
    report.message = e.what();
  }
  return report;
}

}  // namespace mechsq::fock
