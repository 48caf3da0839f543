#pragma once

// Closed-form bounds for linear-Gaussian model pairs.
//
// Everything is written in precision form: the assumed prior enters only
// through Sigma_theta^{-1} (zero for a flat prior), so the flat-prior / QMLE
// limit is exact rather than approximated by a large covariance.

#include "mbcrb/linalg.hpp"
#include "mbcrb/model.hpp"

#include <optional>

namespace mbcrb {

/// theta_0(psi) = gain * psi + offset.
struct AffineMap {
  Matrix gain;
  Vector offset;

  Vector operator()(const Vector& psi) const { return gain * psi + offset; }
};

/// J = J_D + J_P.
struct BfimDecomposition {
  Matrix data_term;
  Matrix prior_term;
  Matrix total;
};

struct BoundReport {
  Matrix pseudotrue_gain;
  Vector pseudotrue_offset;
  Matrix jacobian_A;
  BfimDecomposition bfim;
  Matrix bcrb;
  Matrix mbcrb;
  std::optional<Matrix> biased_bound;  // only when n_theta == n_psi
  Matrix map_error_covariance;
};

/// Pseudotrue parameter as an affine map of psi:
///   (N H^T S^-1 H + P)^-1 (N H^T S^-1 H* psi + P mu_theta).
/// Throws NumericalError when N H^T S^-1 H + P is singular, which can only
/// happen for a flat assumed prior with rank-deficient H.
AffineMap pseudotrue_map(const PreparedPair& model);
Vector pseudotrue(const PreparedPair& model, const Vector& psi);

/// A = (N H^T S^-1 H + P)^-1 N H^T S^-1 H*. Constant in psi for linear models.
Matrix pseudotrue_jacobian(const PreparedPair& model);

BfimDecomposition bfim(const PreparedPair& model);
Matrix bcrb(const PreparedPair& model);

/// A J^-1 A^T.
Matrix mbcrb(const PreparedPair& model);

/// r = theta_0(psi) - psi. Requires n_theta == n_psi.
Vector bias_vector(const PreparedPair& model, const Vector& psi);

/// E_psi{r r^T} = (A - I) Sigma_psi (A - I)^T + m m^T, m = (A - I) mu_psi + c.
Matrix bias_second_moment(const PreparedPair& model);

/// mbcrb + E_psi{r r^T}; bounds E{(theta_hat - psi)(theta_hat - psi)^T}.
Matrix biased_bound(const PreparedPair& model);

/// Error covariance of the MAP estimator around theta_0(psi):
/// C (N H^T S^-1 Sigma* S^-1 H) C with C = (N H^T S^-1 H + P)^-1.
/// Independent of psi.
Matrix map_error_covariance(const PreparedPair& model);

BoundReport compute_bound_report(const PreparedPair& model);

/// Informational signal-to-noise ratio in dB:
/// (||H* mu_psi||^2 + tr(H* Sigma_psi H*^T)) / tr(Sigma*).
double snr_db(const ModelPair& pair);

}  // namespace mbcrb
