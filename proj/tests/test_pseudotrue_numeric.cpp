#include "mbcrb/pseudotrue_numeric.hpp"

#include "mbcrb/bounds.hpp"
#include "mbcrb/rng.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mbcrb;
using namespace mbcrb::testing;

namespace {

KlObjectiveSpec analytic(const ModelPair& pair, const Vector& psi) {
  return {pair, psi, KlEvaluationMode::analytic_expectation, 1, 0};
}

// Direct evaluation of -ln f(X, theta) for one batch: sum of Gaussian
// negative log-densities plus the prior's.
double neg_log_joint(const ModelPair& pair, const ObservationBatch& batch, const Vector& theta) {
  const double log2pi = std::log(2.0 * std::numbers::pi);
  const Matrix& h = pair.assumed_lik.observation_matrix;
  const Matrix& s = pair.assumed_lik.noise_covariance;
  const Matrix s_inv = s.inverse();
  const double log_det_s = std::log(s.determinant());
  double total = 0.0;
  for (Eigen::Index n = 0; n < batch.count(); ++n) {
    const Vector d = Vector(batch.samples.col(n)) - h * theta;
    total += 0.5 * (static_cast<double>(d.size()) * log2pi + log_det_s + d.dot(s_inv * d));
  }
  if (pair.assumed_prior) {
    const Matrix& c = pair.assumed_prior->covariance;
    const Vector d = theta - pair.assumed_prior->mean;
    total += 0.5 * (static_cast<double>(d.size()) * log2pi + std::log(c.determinant()) +
                    d.dot(c.inverse() * d));
  }
  return total;
}

}  // namespace

TEST_CASE("analytic gradient vanishes at the closed-form pseudotrue") {
  const ModelPair paper = paper_config(40);
  const Vector psi = vec({10, 20, 5});
  const ObjectiveValue f =
      kl_objective(analytic(paper, psi), pseudotrue(PreparedPair(paper), psi));
  CHECK(f.gradient.norm() <= 1e-10);

  // Random pairs: relative to the size of the terms that cancel.
  std::mt19937_64 gen(3);
  for (int i = 0; i < 10; ++i) {
    const ModelPair pair = random_pair(gen);
    const PreparedPair model(pair);
    const Vector p = random_matrix(gen, pair.true_dim(), 1).col(0);
    const ObjectiveValue g = kl_objective(analytic(pair, p), pseudotrue(model, p));
    const double magnitude =
        pair.n_samples *
            (model.assumed_whitened_transpose() * pair.true_lik.observation_matrix * p).norm() +
        model.assumed_prior_precision_mean().norm();
    CHECK(g.gradient.norm() <= 1e-10 * (1.0 + magnitude));
  }
}

TEST_CASE("objective gradient matches central finite differences") {
  std::mt19937_64 gen(8);
  for (KlEvaluationMode mode :
       {KlEvaluationMode::analytic_expectation, KlEvaluationMode::sample_average}) {
    const ModelPair pair = random_pair(gen, 4, 10);
    const Vector psi = random_matrix(gen, pair.true_dim(), 1).col(0);
    const KlObjective objective({pair, psi, mode, 50, 4});
    for (int trial = 0; trial < 5; ++trial) {
      const Vector theta = random_matrix(gen, pair.assumed_dim(), 1).col(0);
      const double step = 1e-5;
      Vector fd(theta.size());
      for (Eigen::Index j = 0; j < theta.size(); ++j) {
        Vector plus = theta, minus = theta;
        plus(j) += step;
        minus(j) -= step;
        fd(j) = (objective(plus).value - objective(minus).value) / (2 * step);
      }
      const Vector g = objective(theta).gradient;
      CHECK((g - fd).norm() <= 1e-7 * std::max(1.0, g.norm()));
    }
  }
}

TEST_CASE("sample-average objective equals the direct mean of -ln f") {
  const ModelPair pair = paper_config(6);
  const Vector psi = vec({10, 20, 5});
  const int samples = 40;
  const KlObjectiveSpec spec{pair, psi, KlEvaluationMode::sample_average, samples, 21};
  const Vector theta = vec({9.7, 19.1, 5.4});
  double direct = 0.0;
  for (int s = 0; s < samples; ++s) {
    direct += neg_log_joint(pair, sample_observations(pair, psi, rng::derive_seed(21, {std::uint64_t(s)})),
                            theta);
  }
  direct /= samples;
  CHECK(kl_objective(spec, theta).value == doctest::Approx(direct).epsilon(1e-11));
}

TEST_CASE("sample-average objective converges to the analytic value") {
  const ModelPair pair = paper_config(3);
  const Vector psi = vec({10, 20, 5});
  const Vector theta = vec({9.9, 19.5, 5.2});
  const int samples = 1000000;
  const double analytic_value = kl_objective(analytic(pair, psi), theta).value;
  // Per-draw standard deviation estimated from 2000 direct evaluations.
  double sum = 0, sum_sq = 0;
  for (int s = 0; s < 2000; ++s) {
    const double v = neg_log_joint(pair, sample_observations(pair, psi, rng::derive_seed(77, {std::uint64_t(s)})), theta);
    sum += v;
    sum_sq += v * v;
  }
  const double sd = std::sqrt(sum_sq / 2000 - (sum / 2000) * (sum / 2000));
  const double se = sd / std::sqrt(static_cast<double>(samples));
  const double sampled =
      kl_objective({pair, psi, KlEvaluationMode::sample_average, samples, 9}, theta).value;
  CHECK(std::abs(sampled - analytic_value) <= 4.0 * se);
}

TEST_CASE("minimize_kl examples") {
  SUBCASE("scalar example from zero") {
    const OptimizationResult r = minimize_kl(analytic(scalar_config(), vec({3})), vec({0}));
    CHECK(r.converged);
    CHECK(std::abs(r.minimizer(0) - 1.2) <= 1e-8);
  }
  SUBCASE("matched flat model recovers psi") {
    const Vector psi = vec({10, 20, 5});
    const OptimizationResult r = minimize_kl(analytic(matched_flat_config(7), psi), vec({-50, 3, 100}));
    CHECK(r.converged);
    CHECK((r.minimizer - psi).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("sample-average mode on the paper configuration") {
    const ModelPair pair = paper_config(40);
    const Vector psi = vec({10, 20, 5});
    const KlObjectiveSpec spec{pair, psi, KlEvaluationMode::sample_average, 100000, 13};
    const BatchedMinimizer r = minimize_kl_batched(spec, Vector::Zero(3), 20);
    for (const auto& b : r.batch_results) CHECK(b.converged);
    const Vector closed = pseudotrue(PreparedPair(pair), psi);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(r.minimizer(k) - closed(k)) <= 3.0 * r.standard_error(k));
  }
  SUBCASE("rank-deficient flat problem reports non-convergence") {
    ModelPair pair = matched_flat_config(3);
    pair.assumed_lik.observation_matrix.col(1).setZero();
    const OptimizationResult r = minimize_kl(analytic(pair, vec({1, 2, 3})), Vector::Zero(3));
    CHECK_FALSE(r.converged);
    CHECK_FALSE(r.message.empty());
  }
}

TEST_CASE("analytic minimiser equals the closed form on randomised pairs") {
  std::mt19937_64 gen(1001);
  for (int i = 0; i < 100; ++i) {
    const ModelPair pair = random_pair(gen, 5, 50);
    const Vector psi = random_matrix(gen, pair.true_dim(), 1).col(0) * 4.0;
    const OptimizationResult r = minimize_kl(analytic(pair, psi), Vector::Zero(pair.assumed_dim()));
    CHECK(r.converged);
    CHECK((r.minimizer - pseudotrue(PreparedPair(pair), psi)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("objective is midpoint convex along random directions") {
  std::mt19937_64 gen(55);
  const ModelPair pair = random_pair(gen, 4, 20);
  const KlObjective f(analytic(pair, Vector::Ones(pair.true_dim())));
  for (int i = 0; i < 10; ++i) {
    const Vector a = random_matrix(gen, pair.assumed_dim(), 1).col(0) * 3.0;
    const Vector d = random_matrix(gen, pair.assumed_dim(), 1).col(0);
    const Vector b = a + 2.0 * d;
    CHECK(f(0.5 * (a + b)).value <= 0.5 * (f(a).value + f(b).value) + 1e-12);
  }
}

TEST_CASE("analytic minimiser is independent of the starting point") {
  std::mt19937_64 gen(77);
  const ModelPair pair = paper_config(20);
  const KlObjective objective(analytic(pair, vec({10, 20, 5})));
  const Vector reference = minimize_kl(objective, Vector::Zero(3)).minimizer;
  for (int i = 0; i < 10; ++i) {
    const Vector start = random_matrix(gen, 3, 1).col(0) * 100.0;
    CHECK((minimize_kl(objective, start).minimizer - reference).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(KlObjective({paper_config(2), vec({1, 2, 3}), KlEvaluationMode::sample_average, 0, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(kl_objective(analytic(paper_config(2), vec({1, 2})), vec({1, 2, 3})), DimensionError);
}
