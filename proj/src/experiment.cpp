#include "mbcrb/experiment.hpp"

#include "mbcrb/kernels.hpp"
#include "mbcrb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mbcrb {

std::string_view error_reference_name(ErrorReference ref) {
  return ref == ErrorReference::pseudotrue ? "pseudotrue" : "true-parameter";
}

std::optional<ErrorReference> parse_error_reference(std::string_view name) {
  if (name == "pseudotrue") return ErrorReference::pseudotrue;
  if (name == "true-parameter") return ErrorReference::true_parameter;
  return std::nullopt;
}

std::string_view sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::sample_count: return "N";
    case SweepAxis::assumed_gain: return "h";
    case SweepAxis::assumed_noise_variance: return "sigma_sq";
  }
  return "?";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
  if (name == "N" || name == "sample-count-N") return SweepAxis::sample_count;
  if (name == "h" || name == "assumed-gain-h") return SweepAxis::assumed_gain;
  if (name == "sigma_sq" || name == "assumed-noise-variance-sigma-sq") {
    return SweepAxis::assumed_noise_variance;
  }
  return std::nullopt;
}

void validate_experiment_config(const ExperimentConfig& config) {
  if (config.trials < 100) throw std::invalid_argument("trials must be >= 100");
  if (config.sweep.grid.empty()) throw std::invalid_argument("sweep grid is empty");
  for (std::size_t i = 0; i < config.sweep.grid.size(); ++i) {
    const double v = config.sweep.grid[i];
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw std::invalid_argument("sweep grid entries must be positive and finite");
    }
    if (i > 0 && !(v > config.sweep.grid[i - 1])) {
      throw std::invalid_argument("sweep grid must be strictly increasing");
    }
    if (config.sweep.axis == SweepAxis::sample_count && v != std::floor(v)) {
      throw std::invalid_argument("sample-count grid entries must be integers >= 1");
    }
  }
  if (config.error_reference == ErrorReference::true_parameter &&
      config.pair.assumed_dim() != config.pair.true_dim()) {
    throw std::invalid_argument("true-parameter error reference requires n_theta == n_psi");
  }
  if (config.threads < 0) throw std::invalid_argument("threads must be >= 0");
}

ModelPair apply_axis_value(const ModelPair& pair, SweepAxis axis, double axis_value) {
  ModelPair out = pair;
  switch (axis) {
    case SweepAxis::sample_count:
      out.n_samples = static_cast<int>(axis_value);
      break;
    case SweepAxis::assumed_gain:
      out.assumed_lik.observation_matrix =
          axis_value * Matrix::Identity(pair.assumed_lik.observation_dim(),
                                        pair.assumed_lik.parameter_dim());
      break;
    case SweepAxis::assumed_noise_variance:
      out.assumed_lik.noise_covariance = axis_value * Matrix::Identity(
                                                          pair.assumed_lik.observation_dim(),
                                                          pair.assumed_lik.observation_dim());
      break;
  }
  return out;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

namespace {

// Everything a trial needs at one grid point, built once and shared
// read-only across worker threads.
class GridPoint {
 public:
  GridPoint(const ExperimentConfig& config, double axis_value)
      : config_(config),
        axis_key_(rng::bits_of(axis_value)),
        model_(apply_axis_value(config.pair, config.sweep.axis, axis_value)),
        estimator_(make_estimator_spec(config.estimator, model_.pair()), model_.n_samples()),
        pseudotrue_(pseudotrue_map(model_)),
        prior_lower_(model_.true_prior_factor().lower()) {}

  const PreparedPair& model() const { return model_; }

  struct Workspace {
    Vector z;
    Vector psi;
    Vector reference;
    Vector column_sum;
    Vector theta_hat;
    std::vector<double> noise;
    ObservationBatch batch;
  };

  void squared_error(std::uint64_t trial, Workspace& ws, Vector& out) const {
    const ModelPair& pair = model_.pair();
    const std::uint64_t psi_seed = rng::derive_seed(config_.master_seed, {axis_key_, trial, 0});
    const std::uint64_t obs_seed = rng::derive_seed(config_.master_seed, {axis_key_, trial, 1});

    // Same arithmetic as sample_parameter(true_prior, psi_seed).
    ws.z.resize(pair.true_dim());
    rng::NormalStream normals(psi_seed);
    normals.fill({ws.z.data(), static_cast<std::size_t>(ws.z.size())});
    ws.psi = pair.true_prior.mean + prior_lower_ * ws.z;

    sample_observations_into(model_, ws.psi, obs_seed, ws.noise, ws.batch);
    ws.theta_hat.resize(estimator_.dim());
    estimator_.estimate_into(ws.batch, ws.column_sum, ws.theta_hat);

    if (config_.error_reference == ErrorReference::pseudotrue) {
      ws.reference = pseudotrue_(ws.psi);
    } else {
      ws.reference = ws.psi;
    }
    out = (ws.theta_hat - ws.reference).array().square().matrix();
  }

 private:
  const ExperimentConfig& config_;
  std::uint64_t axis_key_;
  PreparedPair model_;
  PreparedEstimator estimator_;
  AffineMap pseudotrue_;
  Matrix prior_lower_;
};

std::string axis_label(const ExperimentConfig& config, double axis_value) {
  std::ostringstream os;
  os << sweep_axis_name(config.sweep.axis) << "=" << axis_value;
  return os.str();
}

struct MomentEstimate {
  double mean;
  double standard_error;
};

MomentEstimate mean_and_standard_error(std::span<const double> values,
                                       std::vector<double>& scratch) {
  const auto n = static_cast<double>(values.size());
  const double mean = kernels::striped_sum(values) / n;
  scratch.resize(values.size());
  for (std::size_t t = 0; t < values.size(); ++t) scratch[t] = values[t] - mean;
  const double variance = values.size() > 1 ? kernels::striped_sum_squares(scratch) / (n - 1) : 0;
  return {mean, std::sqrt(variance / n)};
}

SweepResult run_grid_point(const ExperimentConfig& config, double axis_value) {
  const GridPoint point(config, axis_value);
  const PreparedPair& model = point.model();
  const auto trials = static_cast<std::size_t>(config.trials);
  const Eigen::Index dim = model.pair().assumed_dim();
  const auto udim = static_cast<std::size_t>(dim);

  // Component-major: squared_errors[k * trials + t]. Every trial writes its
  // own slot, so the aggregate does not depend on scheduling.
  std::vector<double> squared_errors(udim * trials);
  const int threads = std::min<int>(resolve_thread_count(config.threads),
                                    static_cast<int>(trials));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(threads));

  auto worker = [&](int w) {
    try {
      GridPoint::Workspace ws;
      Vector sq(dim);
      const std::size_t begin = trials * static_cast<std::size_t>(w) / threads;
      const std::size_t end = trials * static_cast<std::size_t>(w + 1) / threads;
      for (std::size_t t = begin; t < end; ++t) {
        point.squared_error(t, ws, sq);
        for (std::size_t k = 0; k < udim; ++k) {
          squared_errors[k * trials + t] = sq(static_cast<Eigen::Index>(k));
        }
      }
    } catch (...) {
      failures[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  SweepResult result;
  result.axis_value = axis_value;
  result.rmse.resize(dim);
  result.rmse_standard_error.resize(dim);
  std::vector<double> scratch;
  std::vector<double> trace_errors(trials, 0.0);
  for (std::size_t k = 0; k < udim; ++k) {
    const std::span<const double> row(squared_errors.data() + k * trials, trials);
    for (std::size_t t = 0; t < trials; ++t) trace_errors[t] += row[t];
    const MomentEstimate mse = mean_and_standard_error(row, scratch);
    const double rmse = std::sqrt(mse.mean);
    result.rmse(static_cast<Eigen::Index>(k)) = rmse;
    result.rmse_standard_error(static_cast<Eigen::Index>(k)) =
        rmse > 0.0 ? mse.standard_error / (2.0 * rmse) : 0.0;
  }
  const MomentEstimate trace_mse = mean_and_standard_error(trace_errors, scratch);
  result.trace_rmse = std::sqrt(trace_mse.mean);
  result.trace_rmse_standard_error =
      result.trace_rmse > 0.0 ? trace_mse.standard_error / (2.0 * result.trace_rmse) : 0.0;

  const Matrix bound = config.error_reference == ErrorReference::pseudotrue
                           ? mbcrb(model)
                           : biased_bound(model);
  result.bound_rmse_floor = bound.diagonal().cwiseMax(0.0).cwiseSqrt();
  result.trace_bound_floor = std::sqrt(std::max(0.0, bound.trace()));
  result.bcrb_floor = bcrb(model).diagonal().cwiseSqrt();
  return result;
}

}  // namespace

Vector run_trial(const ExperimentConfig& config, double axis_value, std::uint64_t trial_index) {
  const auto& grid = config.sweep.grid;
  if (std::find(grid.begin(), grid.end(), axis_value) == grid.end()) {
    throw std::invalid_argument("axis value " + axis_label(config, axis_value) +
                                " is not a sweep grid point");
  }
  const GridPoint point(config, axis_value);
  GridPoint::Workspace ws;
  Vector out;
  point.squared_error(trial_index, ws, out);
  return out;
}

std::vector<SweepResult> run_sweep(const ExperimentConfig& config) {
  validate_experiment_config(config);
  std::vector<SweepResult> results;
  results.reserve(config.sweep.grid.size());
  for (double value : config.sweep.grid) {
    try {
      results.push_back(run_grid_point(config, value));
    } catch (const NumericalError& e) {
      throw NumericalError("sweep aborted at " + axis_label(config, value) + ": " + e.what());
    } catch (const DimensionError& e) {
      throw DimensionError("sweep aborted at " + axis_label(config, value) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep aborted at " + axis_label(config, value) + ": " +
                               e.what());
    }
  }
  return results;
}

bool bound_holds(const SweepResult& result, Eigen::Index component, double n_standard_errors) {
  const double rmse = result.rmse(component);
  const double floor = result.bound_rmse_floor(component);
  if (rmse <= 0.0) return floor <= 0.0;
  const double rel_se = result.rmse_standard_error(component) / rmse;
  return rmse >= floor * (1.0 - n_standard_errors * rel_se);
}

}  // namespace mbcrb
