#include "mbcrb/estimators.hpp"

#include "mbcrb/bounds.hpp"
#include "mbcrb/kernels.hpp"
#include "mbcrb/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mbcrb {

std::string_view estimator_kind_name(EstimatorKind kind) {
  return kind == EstimatorKind::map ? "map" : "qmle";
}

EstimatorSpec make_estimator_spec(EstimatorKind kind, const ModelPair& pair) {
  EstimatorSpec spec;
  spec.kind = kind;
  if (kind == EstimatorKind::map) spec.assumed_prior = pair.assumed_prior;
  spec.assumed_lik = pair.assumed_lik;
  return spec;
}

PreparedEstimator::PreparedEstimator(const EstimatorSpec& spec, int n_samples)
    : n_samples_(n_samples) {
  if (n_samples < 1) throw std::invalid_argument("estimator needs at least one observation");
  if (spec.kind == EstimatorKind::qmle && spec.assumed_prior) {
    throw std::invalid_argument("qmle estimator requires a flat assumed prior");
  }
  const Matrix& h = spec.assumed_lik.observation_matrix;
  if (h.rows() != spec.assumed_lik.noise_covariance.rows()) {
    throw DimensionError("assumed observation matrix and noise covariance disagree");
  }
  const SpdFactor noise(spec.assumed_lik.noise_covariance, "assumed_lik.noise_covariance");
  const Matrix ht_s_inv = noise.solve(h).transpose();
  Matrix normal = n_samples * (ht_s_inv * h);
  Vector precision_mean = Vector::Zero(h.cols());
  if (spec.assumed_prior) {
    if (spec.assumed_prior->mean.size() != h.cols()) {
      throw DimensionError("assumed prior dimension does not match observation matrix");
    }
    const SpdFactor prior(spec.assumed_prior->covariance, "assumed_prior.covariance");
    normal += prior.inverse();
    precision_mean = prior.solve(spec.assumed_prior->mean);
  }
  SpdFactor normal_factor;
  try {
    normal_factor = SpdFactor(symmetrize(normal), "normal matrix");
  } catch (const NumericalError&) {
    throw NumericalError("normal matrix singular: observation matrix is rank deficient");
  }
  sum_gain_ = normal_factor.solve(ht_s_inv);
  offset_ = normal_factor.solve(precision_mean);
}

void PreparedEstimator::estimate_into(const ObservationBatch& batch, Vector& column_sum,
                                      Vector& out) const {
  if (batch.count() != n_samples_) {
    throw DimensionError("batch column count does not match the prepared N");
  }
  if (batch.samples.rows() != sum_gain_.cols()) {
    throw DimensionError("batch observation dimension does not match the estimator");
  }
  const auto cols = static_cast<std::size_t>(batch.count());
  column_sum.resize(batch.samples.rows());
  for (Eigen::Index i = 0; i < batch.samples.rows(); ++i) {
    column_sum(i) = kernels::striped_sum({batch.samples.row(i).data(), cols});
  }
  out.noalias() = sum_gain_ * column_sum;
  out += offset_;
}

Vector PreparedEstimator::estimate(const ObservationBatch& batch) const {
  Vector column_sum;
  Vector out(dim());
  estimate_into(batch, column_sum, out);
  return out;
}

Vector estimate(const EstimatorSpec& spec, const ObservationBatch& batch) {
  return PreparedEstimator(spec, static_cast<int>(batch.count())).estimate(batch);
}

MsBiasDiagnostic ms_bias_diagnostic(const EstimatorSpec& spec, const ModelPair& pair,
                                    const Vector& psi, int trials, std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("ms_bias_diagnostic needs trials >= 100");
  const PreparedPair prepared(pair);
  const PreparedEstimator estimator(spec, pair.n_samples);
  const Vector target = pseudotrue(prepared, psi);
  const Eigen::Index dim = target.size();
  const auto n = static_cast<std::size_t>(trials);

  std::vector<double> errors(static_cast<std::size_t>(dim) * n);
  std::vector<double> noise;
  ObservationBatch batch;
  Vector column_sum;
  Vector theta_hat(dim);
  for (std::size_t t = 0; t < n; ++t) {
    sample_observations_into(prepared, psi, rng::derive_seed(seed, {t}), noise, batch);
    estimator.estimate_into(batch, column_sum, theta_hat);
    for (Eigen::Index k = 0; k < dim; ++k) {
      errors[static_cast<std::size_t>(k) * n + t] = theta_hat(k) - target(k);
    }
  }

  MsBiasDiagnostic out{Vector(dim), Vector(dim)};
  std::vector<double> centered(n);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double* row = errors.data() + static_cast<std::size_t>(k) * n;
    const double mean = kernels::striped_sum({row, n}) / static_cast<double>(n);
    for (std::size_t t = 0; t < n; ++t) centered[t] = row[t] - mean;
    const double variance = kernels::striped_sum_squares(centered) / static_cast<double>(n - 1);
    out.mean_error(k) = mean;
    out.standard_error(k) = std::sqrt(variance / static_cast<double>(n));
  }
  return out;
}

}  // namespace mbcrb
