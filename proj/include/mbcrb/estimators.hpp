#pragma once

#include "mbcrb/linalg.hpp"
#include "mbcrb/model.hpp"

#include <cstdint>
#include <optional>
#include <string_view>

namespace mbcrb {

enum class EstimatorKind { map, qmle };

std::string_view estimator_kind_name(EstimatorKind kind);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::map;
  std::optional<GaussianDensity> assumed_prior;  // must be empty for qmle
  LinearGaussianLikelihood assumed_lik;
};

/// Estimator for the assumed model of `pair`. QMLE drops the assumed prior.
EstimatorSpec make_estimator_spec(EstimatorKind kind, const ModelPair& pair);

/// MAP estimator under the assumed model with the normal-equations matrix
/// N H^T S^-1 H + P factorised once for a given N:
///   theta_hat = (N H^T S^-1 H + P)^-1 (H^T S^-1 sum_n x_n + P mu_theta).
class PreparedEstimator {
 public:
  PreparedEstimator(const EstimatorSpec& spec, int n_samples);

  int n_samples() const { return n_samples_; }
  Eigen::Index dim() const { return offset_.size(); }

  Vector estimate(const ObservationBatch& batch) const;
  /// Same as estimate() but writes into `out` without allocating.
  void estimate_into(const ObservationBatch& batch, Vector& column_sum, Vector& out) const;

 private:
  int n_samples_;
  Matrix sum_gain_;  // (N H^T S^-1 H + P)^-1 H^T S^-1
  Vector offset_;    // (N H^T S^-1 H + P)^-1 P mu_theta
};

Vector estimate(const EstimatorSpec& spec, const ObservationBatch& batch);

struct MsBiasDiagnostic {
  Vector mean_error;
  Vector standard_error;
};

/// Monte Carlo mean of theta_hat - theta_0(psi) at fixed psi. trials >= 100.
MsBiasDiagnostic ms_bias_diagnostic(const EstimatorSpec& spec, const ModelPair& pair,
                                    const Vector& psi, int trials, std::uint64_t seed);

}  // namespace mbcrb
