#pragma once

#include <span>
#include <vector>

#include "mechsq/types.hpp"

namespace mechsq {

// Quadrature convention: hbar = 1, x = (c + c^dag)/sqrt(2),
// p = (c - c^dag)/(i sqrt(2)), ordering (x1, p1, ..., xN, pN).
// Vacuum covariance is I/2.

struct SqueezingParams {
  double r = 0.0;
  double phi = 0.0;

  /// Validates r >= 0 and reduces phi into [0, 2pi).
  static SqueezingParams make(double r, double phi);
  /// xi = r e^{-i phi}
  Complex xi() const { return std::polar(r, -phi); }
};

class GaussianState {
public:
  /// Covariance is symmetrized; dimensions must agree.
  GaussianState(Vector mean, Matrix cov);

  int n_modes() const { return static_cast<int>(mean_.size() / 2); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }

  /// Reduced state of the listed modes, in the given order.
  GaussianState marginal(std::span<const int> modes) const;

private:
  Vector mean_;
  Matrix cov_;
};

/// Uncorrelated joint state (first's modes, then second's).
GaussianState direct_sum(const GaussianState& first, const GaussianState& second);

/// Normally ordered moments of the fluctuations:
/// normal(j,k) = <dc_j^dag dc_k>, anomalous(j,k) = <dc_j dc_k>, mean(j) = <c_j>.
struct ModeMoments {
  CVector mean;
  CMatrix normal;
  CMatrix anomalous;
};

ModeMoments mode_moments(const GaussianState& state);
GaussianState state_from_moments(const ModeMoments& moments);

Matrix symplectic_form(int n_modes);

/// Real quadrature matrix of the linear map c -> U c + W c^dag.
Matrix quadrature_map(const CMatrix& U, const CMatrix& W);

/// Smallest eigenvalue of the Hermitian matrix cov + (i/2) Omega.
/// Physical states have a margin >= 0; pure states sit at exactly 0.
double heisenberg_margin(const GaussianState& state);

bool satisfies_uncertainty(const GaussianState& state, double tol = 1e-9);

GaussianState vacuum(int n_modes);
GaussianState thermal(int n_modes, double occupation);

/// mean -> S mean, cov -> S cov S^T. Throws PreconditionError when
/// ||S Omega S^T - Omega|| exceeds 1e-9 (the norm is in the message).
GaussianState apply_symplectic(const Matrix& S, const GaussianState& state);

Matrix rotation_matrix(double theta);
/// Heisenberg action b -> b cosh r - b^dag e^{i phi} sinh r of S(xi).
Matrix single_mode_squeezer(const SqueezingParams& params);
/// c1 -> c1 cosh r - c2^dag e^{i phi} sinh r (and 1 <-> 2).
Matrix two_mode_squeezer(const SqueezingParams& params);
/// b1 = (c1 + c2)/sqrt2, b2 = (c1 - c2)/sqrt2. An involution.
Matrix beam_splitter_matrix();

GaussianState single_mode_squeezed_vacuum(const SqueezingParams& params);
GaussianState two_mode_squeezed_vacuum(const SqueezingParams& params);
GaussianState beam_splitter_5050(const GaussianState& state);

/// Var(X1^t1 + X2^t2) + Var(X1^{t1+pi/2} - X2^{t2+pi/2}),
/// with X^t = (c e^{-it} + c^dag e^{it})/sqrt2.
double epr_variance(const GaussianState& state, double theta1, double theta2);

struct EprMinimum {
  double value = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

/// Minimum of epr_variance over local phases: 64x64 grid, then
/// alternating Brent refinement along theta1 +/- theta2.
EprMinimum epr_min(const GaussianState& state);

/// <c_j^dag c_j>, including the coherent part.
double mode_occupation(const GaussianState& state, int mode);
/// 1 / (2^N sqrt(det cov)); throws if cov is not positive definite.
double purity(const GaussianState& state);

/// r estimated from the principal variances of a single-mode marginal,
/// r = ln(v_max/v_min)/4. Exact for squeezed thermal states.
double squeeze_parameter(const GaussianState& state, int mode);

}  // namespace mechsq
