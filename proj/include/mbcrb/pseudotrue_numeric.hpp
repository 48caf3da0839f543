#pragma once

// Numerical pseudotrue solver: minimises -E_{x|psi}{ln f(X, theta)} over
// theta, where f is the assumed joint density of N observations and theta.
// Independent of the closed form in bounds.hpp and usable as its oracle.

#include "mbcrb/linalg.hpp"
#include "mbcrb/model.hpp"

#include <cstdint>
#include <vector>

namespace mbcrb {

enum class KlEvaluationMode { analytic_expectation, sample_average };

struct KlObjectiveSpec {
  ModelPair pair;
  Vector psi;
  KlEvaluationMode evaluation_mode = KlEvaluationMode::analytic_expectation;
  int mc_samples = 1;  // sample_average only; each sample is a batch of N observations
  std::uint64_t seed = 0;
};

struct ObjectiveValue {
  double value = 0.0;
  Vector gradient;
};

struct OptimizationResult {
  Vector minimizer;
  double objective_value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

inline constexpr int kMaxKlIterations = 10000;

/// Converged when ||grad|| <= kKlGradientTolerance * (1 + |f|).
inline constexpr double kKlGradientTolerance = 1e-9;

/// Prepared objective. In sample-average mode the batch of draws is generated
/// once at construction and reused by every evaluation.
class KlObjective {
 public:
  explicit KlObjective(const KlObjectiveSpec& spec);
  /// Sample-average objective restricted to draws [first_sample,
  /// first_sample + sample_count) of the spec's draw sequence.
  KlObjective(const KlObjectiveSpec& spec, int first_sample, int sample_count);

  ObjectiveValue operator()(const Vector& theta) const;

  /// Constant Hessian N H^T S^-1 H + P of the (quadratic) objective.
  const Matrix& hessian() const { return hessian_; }
  Eigen::Index dim() const { return hessian_.rows(); }
  KlEvaluationMode mode() const { return mode_; }

 private:
  KlEvaluationMode mode_;
  int n_samples_;
  Matrix hessian_;
  Matrix ht_s_inv_;       // H^T S^-1
  Matrix observation_matrix_;
  Matrix assumed_lower_;  // Cholesky factor of S
  Vector mean_obs_;       // E{x} (analytic) or sample mean over all draws
  double spread_ = 0;     // E{(x - mean)^T S^-1 (x - mean)} or its sample value
  double likelihood_const_ = 0;
  Matrix prior_precision_;
  Vector prior_mean_;
  double prior_const_ = 0;
  bool flat_prior_ = true;
};

ObjectiveValue kl_objective(const KlObjectiveSpec& spec, const Vector& theta);

/// Exact Newton iterations in analytic mode; gradient descent with Armijo
/// backtracking in sample-average mode. Never throws on non-convergence:
/// returns converged == false with a diagnostic message instead.
OptimizationResult minimize_kl(const KlObjectiveSpec& spec, const Vector& initial);
OptimizationResult minimize_kl(const KlObjective& objective, const Vector& initial);

/// Sample-average minimiser with a batching standard error: the mc_samples
/// draws are split into `batches` equal groups, each minimised separately.
struct BatchedMinimizer {
  Vector minimizer;        // minimiser over all draws
  Vector standard_error;   // std-dev of batch minimisers / sqrt(batches)
  std::vector<OptimizationResult> batch_results;
};

BatchedMinimizer minimize_kl_batched(const KlObjectiveSpec& spec, const Vector& initial,
                                     int batches);

}  // namespace mbcrb
