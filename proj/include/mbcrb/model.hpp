#pragma once

#include "mbcrb/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mbcrb {

struct GaussianDensity {
  Vector mean;
  Matrix covariance;
};

/// x_n | param ~ N(observation_matrix * param, noise_covariance).
struct LinearGaussianLikelihood {
  Matrix observation_matrix;
  Matrix noise_covariance;

  Eigen::Index observation_dim() const { return observation_matrix.rows(); }
  Eigen::Index parameter_dim() const { return observation_matrix.cols(); }
};

/// True data-generating model (prior on psi, likelihood H*, Sigma*) together
/// with the assumed model (prior on theta, likelihood H, Sigma) and the
/// number of i.i.d. observations N.
///
/// An empty `assumed_prior` denotes a flat prior (zero precision), which
/// turns the MAP estimator into the QMLE.
struct ModelPair {
  GaussianDensity true_prior;
  LinearGaussianLikelihood true_lik;
  std::optional<GaussianDensity> assumed_prior;
  LinearGaussianLikelihood assumed_lik;
  int n_samples = 1;

  Eigen::Index true_dim() const { return true_prior.mean.size(); }
  Eigen::Index assumed_dim() const { return assumed_lik.parameter_dim(); }
  Eigen::Index observation_dim() const { return true_lik.observation_dim(); }
  bool flat_assumed_prior() const { return !assumed_prior.has_value(); }
};

/// Observations x_1..x_N stored as the columns of an n_x x N matrix. Storage
/// is row-major so that each observation component is contiguous across
/// samples, which is the layout the sampling kernels work on.
struct ObservationBatch {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> samples;
  Vector generating_parameter;
  std::uint64_t seed = 0;

  Eigen::Index count() const { return samples.cols(); }
};

/// sigma_sq * Q with Q(i, j) = rho^|i - j|. Throws std::invalid_argument for
/// |rho| >= 1, sigma_sq <= 0 or n < 1.
Matrix build_ar1_covariance(double rho, int n, double sigma_sq);

/// Returns one entry per violated invariant; empty when the pair is valid.
std::vector<std::string> validate_model_pair(const ModelPair& pair);

/// Draw from N(mean, covariance) as mean + L z, deterministic in the seed.
Vector sample_parameter(const GaussianDensity& prior, std::uint64_t rng_seed);

ObservationBatch sample_observations(const ModelPair& pair, const Vector& psi,
                                     std::uint64_t rng_seed);

class PreparedPair;

/// Allocation-free variant used by the Monte Carlo loop. `noise` and
/// `batch.samples` are resized only when their shape changes.
void sample_observations_into(const PreparedPair& prepared, const Vector& psi,
                              std::uint64_t rng_seed, std::vector<double>& noise,
                              ObservationBatch& batch);

/// Validated model pair with every covariance factorised once.
///
/// Construction throws NumericalError (non-PD covariance) or DimensionError
/// (shape mismatch) carrying the validation report.
class PreparedPair {
 public:
  explicit PreparedPair(ModelPair pair);

  const ModelPair& pair() const { return pair_; }
  int n_samples() const { return pair_.n_samples; }

  const SpdFactor& true_prior_factor() const { return true_prior_; }
  const SpdFactor& true_noise_factor() const { return true_noise_; }
  const SpdFactor& assumed_noise_factor() const { return assumed_noise_; }

  /// Row-major copy of the lower Cholesky factor of Sigma*.
  const std::vector<double>& true_noise_lower_rowmajor() const { return true_noise_lower_; }

  /// Sigma_theta^{-1}; the zero matrix for a flat assumed prior.
  const Matrix& assumed_prior_precision() const { return assumed_precision_; }
  /// Sigma_theta^{-1} mu_theta; zero for a flat assumed prior.
  const Vector& assumed_prior_precision_mean() const { return assumed_precision_mean_; }

  /// H^T Sigma^{-1} (n_theta x n_x).
  const Matrix& assumed_whitened_transpose() const { return assumed_ht_sigma_inv_; }

 private:
  ModelPair pair_;
  SpdFactor true_prior_;
  SpdFactor true_noise_;
  SpdFactor assumed_noise_;
  std::vector<double> true_noise_lower_;
  Matrix assumed_precision_;
  Vector assumed_precision_mean_;
  Matrix assumed_ht_sigma_inv_;
};

}  // namespace mbcrb
