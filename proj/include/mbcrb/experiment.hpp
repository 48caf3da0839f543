#pragma once

// Monte Carlo engine: per trial, psi ~ p(psi), X | psi from the true model,
// theta_hat from the assumed-model estimator, and the squared error against
// either theta_0(psi) or psi. Results are aggregated per sweep grid point and
// paired with the matching bound.

#include "mbcrb/bounds.hpp"
#include "mbcrb/estimators.hpp"
#include "mbcrb/model.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace mbcrb {

enum class ErrorReference { pseudotrue, true_parameter };
enum class SweepAxis { sample_count, assumed_gain, assumed_noise_variance };

std::string_view error_reference_name(ErrorReference ref);
std::optional<ErrorReference> parse_error_reference(std::string_view name);
std::string_view sweep_axis_name(SweepAxis axis);
std::optional<SweepAxis> parse_sweep_axis(std::string_view name);

struct SweepSpec {
  SweepAxis axis = SweepAxis::sample_count;
  std::vector<double> grid;  // strictly increasing; integers >= 1 for N
};

struct ExperimentConfig {
  ModelPair pair;  // template; the swept quantity is overwritten per grid point
  EstimatorKind estimator = EstimatorKind::map;
  int trials = 10000;
  std::uint64_t master_seed = 0;
  ErrorReference error_reference = ErrorReference::pseudotrue;
  SweepSpec sweep;
  int threads = 0;  // 0: hardware concurrency
};

/// Throws std::invalid_argument naming the violated constraint.
void validate_experiment_config(const ExperimentConfig& config);

/// Template pair with the sweep axis set to `axis_value`:
/// N for sample_count, H = h I for assumed_gain, Sigma = s I for
/// assumed_noise_variance.
ModelPair apply_axis_value(const ModelPair& pair, SweepAxis axis, double axis_value);

struct SweepResult {
  double axis_value = 0.0;
  Vector rmse;                 // per component of theta
  Vector rmse_standard_error;  // delta method on the mean squared error
  Vector bound_rmse_floor;     // sqrt(diag) of mbcrb or biased bound
  Vector bcrb_floor;           // sqrt(diag(bcrb)), per component of psi
  double trace_rmse = 0.0;
  double trace_rmse_standard_error = 0.0;
  double trace_bound_floor = 0.0;
};

/// One realisation; deterministic in (master_seed, axis_value, trial_index).
Vector run_trial(const ExperimentConfig& config, double axis_value, std::uint64_t trial_index);

std::vector<SweepResult> run_sweep(const ExperimentConfig& config);

/// rmse >= floor * (1 - n_standard_errors * rmse_se / rmse) for component k.
bool bound_holds(const SweepResult& result, Eigen::Index component,
                 double n_standard_errors = 3.0);

int resolve_thread_count(int requested);

}  // namespace mbcrb
