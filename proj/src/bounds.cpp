#include "mbcrb/bounds.hpp"

#include <cmath>

namespace mbcrb {

namespace {

// N H^T S^-1 H + P, factorised.
SpdFactor normal_matrix_factor(const PreparedPair& model) {
  const ModelPair& pair = model.pair();
  const Matrix& ht_s_inv = model.assumed_whitened_transpose();
  const Matrix normal = pair.n_samples * (ht_s_inv * pair.assumed_lik.observation_matrix) +
                        model.assumed_prior_precision();
  try {
    return SpdFactor(symmetrize(normal), "normal matrix");
  } catch (const NumericalError&) {
    throw NumericalError(
        "normal matrix N H^T Sigma^-1 H + Sigma_theta^-1 is singular "
        "(flat assumed prior with rank-deficient H?)");
  }
}

void require_same_space(const PreparedPair& model, const char* what) {
  if (model.pair().assumed_dim() != model.pair().true_dim()) {
    throw DimensionError(std::string(what) + " requires n_theta == n_psi");
  }
}

}  // namespace

AffineMap pseudotrue_map(const PreparedPair& model) {
  const ModelPair& pair = model.pair();
  const SpdFactor normal = normal_matrix_factor(model);
  const Matrix data_cross =
      pair.n_samples * (model.assumed_whitened_transpose() * pair.true_lik.observation_matrix);
  return {normal.solve(data_cross), normal.solve(model.assumed_prior_precision_mean())};
}

Vector pseudotrue(const PreparedPair& model, const Vector& psi) {
  if (psi.size() != model.pair().true_dim()) {
    throw DimensionError("psi length does not match the true parameter dimension");
  }
  return pseudotrue_map(model)(psi);
}

Matrix pseudotrue_jacobian(const PreparedPair& model) { return pseudotrue_map(model).gain; }

BfimDecomposition bfim(const PreparedPair& model) {
  const ModelPair& pair = model.pair();
  const Matrix& h_true = pair.true_lik.observation_matrix;
  BfimDecomposition out;
  out.data_term =
      symmetrize(pair.n_samples * (h_true.transpose() * model.true_noise_factor().solve(h_true)));
  out.prior_term = model.true_prior_factor().inverse();
  out.total = out.data_term + out.prior_term;
  return out;
}

Matrix bcrb(const PreparedPair& model) {
  return SpdFactor(bfim(model).total, "Bayesian Fisher information").inverse();
}

Matrix mbcrb(const PreparedPair& model) {
  const Matrix a = pseudotrue_jacobian(model);
  const SpdFactor j(bfim(model).total, "Bayesian Fisher information");
  return symmetrize(a * j.solve(Matrix(a.transpose())));
}

Vector bias_vector(const PreparedPair& model, const Vector& psi) {
  require_same_space(model, "bias_vector");
  return pseudotrue(model, psi) - psi;
}

Matrix bias_second_moment(const PreparedPair& model) {
  require_same_space(model, "bias_second_moment");
  const ModelPair& pair = model.pair();
  const AffineMap map = pseudotrue_map(model);
  const Matrix shrink = map.gain - Matrix::Identity(map.gain.rows(), map.gain.cols());
  const Vector mean_bias = shrink * pair.true_prior.mean + map.offset;
  return symmetrize(shrink * pair.true_prior.covariance * shrink.transpose() +
                    mean_bias * mean_bias.transpose());
}

Matrix biased_bound(const PreparedPair& model) {
  require_same_space(model, "biased_bound");
  return symmetrize(mbcrb(model) + bias_second_moment(model));
}

Matrix map_error_covariance(const PreparedPair& model) {
  const ModelPair& pair = model.pair();
  const SpdFactor normal = normal_matrix_factor(model);
  const Matrix& ht_s_inv = model.assumed_whitened_transpose();
  const Matrix middle =
      pair.n_samples * (ht_s_inv * pair.true_lik.noise_covariance * ht_s_inv.transpose());
  const Matrix c_middle = normal.solve(middle);
  return symmetrize(normal.solve(Matrix(c_middle.transpose())));
}

BoundReport compute_bound_report(const PreparedPair& model) {
  BoundReport report;
  const AffineMap map = pseudotrue_map(model);
  report.pseudotrue_gain = map.gain;
  report.pseudotrue_offset = map.offset;
  report.jacobian_A = map.gain;
  report.bfim = bfim(model);
  report.bcrb = bcrb(model);
  report.mbcrb = mbcrb(model);
  if (model.pair().assumed_dim() == model.pair().true_dim()) {
    report.biased_bound = biased_bound(model);
  }
  report.map_error_covariance = map_error_covariance(model);
  return report;
}

double snr_db(const ModelPair& pair) {
  const Matrix& h = pair.true_lik.observation_matrix;
  const double signal = (h * pair.true_prior.mean).squaredNorm() +
                        (h * pair.true_prior.covariance * h.transpose()).trace();
  return 10.0 * std::log10(signal / pair.true_lik.noise_covariance.trace());
}

}  // namespace mbcrb
