#include "mbcrb/pseudotrue_numeric.hpp"

#include "mbcrb/kernels.hpp"
#include "mbcrb/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mbcrb {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

}  // namespace

KlObjective::KlObjective(const KlObjectiveSpec& spec)
    : KlObjective(spec, 0,
                  spec.evaluation_mode == KlEvaluationMode::sample_average ? spec.mc_samples : 0) {}

KlObjective::KlObjective(const KlObjectiveSpec& spec, int first_sample, int sample_count)
    : mode_(spec.evaluation_mode), n_samples_(spec.pair.n_samples) {
  const PreparedPair prepared(spec.pair);
  const ModelPair& pair = prepared.pair();
  if (spec.psi.size() != pair.true_dim()) {
    throw DimensionError("psi length does not match the true parameter dimension");
  }

  ht_s_inv_ = prepared.assumed_whitened_transpose();
  assumed_lower_ = prepared.assumed_noise_factor().lower();
  observation_matrix_ = pair.assumed_lik.observation_matrix;
  hessian_ = n_samples_ * symmetrize(ht_s_inv_ * observation_matrix_) +
             prepared.assumed_prior_precision();

  const Eigen::Index nx = pair.observation_dim();
  likelihood_const_ = 0.5 * (static_cast<double>(nx) * kLog2Pi +
                             prepared.assumed_noise_factor().log_det());

  if (mode_ == KlEvaluationMode::analytic_expectation) {
    mean_obs_ = pair.true_lik.observation_matrix * spec.psi;
    spread_ = prepared.assumed_noise_factor().solve(pair.true_lik.noise_covariance).trace();
  } else {
    if (sample_count < 1) {
      throw std::invalid_argument("mc_samples must be >= 1 in sample-average mode");
    }
    // Exact sample mean of -ln p(X | theta) through the sufficient
    // statistics mean(x) and mean((x - mean)^T S^-1 (x - mean)) of the
    // fixed draw set. The second is centred on the first draw's mean so
    // large observation offsets do not cancel.
    Vector centre;
    Vector sum = Vector::Zero(nx);
    double quad_sum = 0.0;
    std::vector<double> noise;
    ObservationBatch batch;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> whitened;
    for (int s = first_sample; s < first_sample + sample_count; ++s) {
      const std::uint64_t seed = rng::derive_seed(spec.seed, {static_cast<std::uint64_t>(s)});
      sample_observations_into(prepared, spec.psi, seed, noise, batch);
      if (centre.size() == 0) centre = batch.samples.rowwise().mean();
      batch.samples.colwise() -= centre;
      whitened = assumed_lower_.triangularView<Eigen::Lower>().solve(batch.samples);
      const auto cols = static_cast<std::size_t>(batch.count());
      for (Eigen::Index i = 0; i < nx; ++i) {
        sum(i) += kernels::striped_sum({batch.samples.row(i).data(), cols});
        quad_sum += kernels::striped_sum_squares({whitened.row(i).data(), cols});
      }
    }
    const double draws = static_cast<double>(sample_count) * n_samples_;
    const Vector offset = sum / draws;
    const Vector w = assumed_lower_.triangularView<Eigen::Lower>().solve(offset);
    mean_obs_ = centre + offset;
    spread_ = quad_sum / draws - w.squaredNorm();
  }

  flat_prior_ = pair.flat_assumed_prior();
  if (!flat_prior_) {
    const SpdFactor prior(pair.assumed_prior->covariance, "assumed_prior.covariance");
    prior_precision_ = prepared.assumed_prior_precision();
    prior_mean_ = pair.assumed_prior->mean;
    prior_const_ = 0.5 * (static_cast<double>(prior_mean_.size()) * kLog2Pi + prior.log_det());
  }
}

ObjectiveValue KlObjective::operator()(const Vector& theta) const {
  if (theta.size() != dim()) throw DimensionError("theta length does not match n_theta");
  const Vector residual = mean_obs_ - observation_matrix_ * theta;
  const Vector whitened = assumed_lower_.triangularView<Eigen::Lower>().solve(residual);
  ObjectiveValue out;
  out.value = n_samples_ * (likelihood_const_ + 0.5 * (spread_ + whitened.squaredNorm()));
  out.gradient = -n_samples_ * (ht_s_inv_ * residual);
  if (!flat_prior_) {
    const Vector centered = theta - prior_mean_;
    const Vector weighted = prior_precision_ * centered;
    out.value += prior_const_ + 0.5 * centered.dot(weighted);
    out.gradient += weighted;
  }
  return out;
}

ObjectiveValue kl_objective(const KlObjectiveSpec& spec, const Vector& theta) {
  return KlObjective(spec)(theta);
}

namespace {

bool gradient_small(const ObjectiveValue& f) {
  return f.gradient.norm() <= kKlGradientTolerance * (1.0 + std::abs(f.value));
}

OptimizationResult newton(const KlObjective& objective, const Vector& initial) {
  OptimizationResult result;
  result.minimizer = initial;
  ObjectiveValue f = objective(initial);
  SpdFactor hessian;
  try {
    hessian = SpdFactor(objective.hessian(), "KL Hessian");
  } catch (const NumericalError& e) {
    result.objective_value = f.value;
    result.gradient_norm = f.gradient.norm();
    result.message = std::string("Hessian not positive definite: ") + e.what();
    return result;
  }
  while (!gradient_small(f) && result.iterations < kMaxKlIterations) {
    const Vector step = hessian.solve(f.gradient);
    const ObjectiveValue next = objective(result.minimizer - step);
    ++result.iterations;
    // Rounding can stall the final digits; stop once a Newton step no longer
    // reduces the gradient.
    if (next.gradient.norm() >= f.gradient.norm()) break;
    result.minimizer -= step;
    f = next;
  }
  result.objective_value = f.value;
  result.gradient_norm = f.gradient.norm();
  result.converged = gradient_small(f);
  if (!result.converged) {
    std::ostringstream os;
    os << "Newton stalled after " << result.iterations
       << " iterations, gradient norm " << result.gradient_norm;
    result.message = os.str();
  }
  return result;
}

OptimizationResult gradient_descent(const KlObjective& objective, const Vector& initial) {
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 200;
  OptimizationResult result;
  result.minimizer = initial;
  ObjectiveValue f = objective(initial);
  double step = 1.0;
  while (!gradient_small(f) && result.iterations < kMaxKlIterations) {
    const double grad_sq = f.gradient.squaredNorm();
    int backtracks = 0;
    Vector candidate;
    ObjectiveValue trial;
    for (;;) {
      candidate = result.minimizer - step * f.gradient;
      trial = objective(candidate);
      if (trial.value <= f.value - kArmijo * step * grad_sq) break;
      // Near the minimum the decrease drops below the rounding of f; fall
      // back to requiring a smaller gradient there.
      const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(f.value);
      if (trial.value <= f.value + noise && trial.gradient.squaredNorm() < grad_sq) break;
      step *= 0.5;
      if (++backtracks > kMaxBacktracks) break;
    }
    ++result.iterations;
    if (backtracks > kMaxBacktracks) {
      result.message = "line search failed to find a decrease";
      break;
    }
    result.minimizer = candidate;
    f = trial;
    step *= 2.0;
  }
  result.objective_value = f.value;
  result.gradient_norm = f.gradient.norm();
  result.converged = gradient_small(f);
  if (!result.converged && result.message.empty()) {
    std::ostringstream os;
    os << "iteration cap " << kMaxKlIterations << " reached, gradient norm "
       << result.gradient_norm;
    result.message = os.str();
  }
  return result;
}

}  // namespace

OptimizationResult minimize_kl(const KlObjective& objective, const Vector& initial) {
  if (initial.size() != objective.dim()) {
    throw DimensionError("initial point length does not match n_theta");
  }
  return objective.mode() == KlEvaluationMode::analytic_expectation
             ? newton(objective, initial)
             : gradient_descent(objective, initial);
}

OptimizationResult minimize_kl(const KlObjectiveSpec& spec, const Vector& initial) {
  return minimize_kl(KlObjective(spec), initial);
}

BatchedMinimizer minimize_kl_batched(const KlObjectiveSpec& spec, const Vector& initial,
                                     int batches) {
  if (spec.evaluation_mode != KlEvaluationMode::sample_average) {
    throw std::invalid_argument("batched minimisation requires sample-average mode");
  }
  if (batches < 2 || spec.mc_samples < batches) {
    throw std::invalid_argument("need at least two batches with one draw each");
  }
  BatchedMinimizer out;
  out.minimizer = minimize_kl(KlObjective(spec), initial).minimizer;

  const int per_batch = spec.mc_samples / batches;
  Matrix minimizers(initial.size(), batches);
  for (int b = 0; b < batches; ++b) {
    out.batch_results.push_back(minimize_kl(KlObjective(spec, b * per_batch, per_batch), initial));
    minimizers.col(b) = out.batch_results.back().minimizer;
  }
  const Vector batch_mean = minimizers.rowwise().mean();
  const Matrix centered = minimizers.colwise() - batch_mean;
  const Vector variance = centered.rowwise().squaredNorm() / (batches - 1);
  out.standard_error = (variance / batches).cwiseSqrt();
  return out;
}

}  // namespace mbcrb
