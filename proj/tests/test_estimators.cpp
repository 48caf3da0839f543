#include "mbcrb/estimators.hpp"

#include "mbcrb/bounds.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace mbcrb;
using namespace mbcrb::testing;

namespace {

ObservationBatch batch_from(const Matrix& columns) {
  ObservationBatch b;
  b.samples = columns;
  return b;
}

}  // namespace

TEST_CASE("qmle with H = I, Sigma = I is the column mean") {
  EstimatorSpec spec{EstimatorKind::qmle, std::nullopt, {Matrix::Identity(2, 2), Matrix::Identity(2, 2)}};
  Matrix x(2, 5);
  x << 1, 2, 3, 4, 5, -1, 0, 2, 7, 1;
  const Vector theta = estimate(spec, batch_from(x));
  CHECK(theta(0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(theta(1) == doctest::Approx(1.8).epsilon(1e-15));
}

TEST_CASE("noiseless batch with matched H and flat prior recovers psi") {
  const ModelPair pair = matched_flat_config(6);
  const Vector psi = vec({10, 20, 5});
  const Matrix x = (pair.true_lik.observation_matrix * psi).replicate(1, 6);
  const Vector theta = estimate(make_estimator_spec(EstimatorKind::map, pair), batch_from(x));
  CHECK((theta - psi).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("scalar MAP with a single observation") {
  const EstimatorSpec spec = make_estimator_spec(EstimatorKind::map, scalar_config());
  CHECK(estimate(spec, batch_from(Matrix::Constant(1, 1, 5.0)))(0) ==
        doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("estimator is affine in the batch") {
  const ModelPair pair = paper_config(8);
  const PreparedEstimator estimator(make_estimator_spec(EstimatorKind::map, pair), 8);
  const ObservationBatch a = sample_observations(pair, vec({10, 20, 5}), 1);
  const ObservationBatch b = sample_observations(pair, vec({11, 19, 4}), 2);
  ObservationBatch avg;
  avg.samples = 0.5 * (a.samples + b.samples);
  const Vector lhs = estimator.estimate(avg);
  const Vector rhs = 0.5 * (estimator.estimate(a) + estimator.estimate(b));
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("MAP converges to QMLE as the prior precision vanishes") {
  ModelPair pair = paper_config(10);
  const Matrix& h = pair.assumed_lik.observation_matrix;
  const Matrix normal = pair.n_samples * h.transpose() * pair.assumed_lik.noise_covariance.inverse() * h;
  const double t = 1e-12 * normal.norm();
  // Prior precision t * Sigma_theta^-1, i.e. covariance Sigma_theta / t.
  pair.assumed_prior->covariance /= t;
  const ObservationBatch batch = sample_observations(pair, vec({10, 20, 5}), 3);
  const Vector map = estimate(make_estimator_spec(EstimatorKind::map, pair), batch);
  const Vector qmle = estimate(make_estimator_spec(EstimatorKind::qmle, pair), batch);
  CHECK((map - qmle).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("estimator spec errors") {
  ModelPair pair = matched_flat_config(4);
  pair.assumed_lik.observation_matrix.col(0).setZero();
  CHECK_THROWS_AS(PreparedEstimator(make_estimator_spec(EstimatorKind::qmle, pair), 4),
                  NumericalError);
  EstimatorSpec bad = make_estimator_spec(EstimatorKind::map, paper_config(4));
  bad.kind = EstimatorKind::qmle;
  CHECK_THROWS_AS(PreparedEstimator(bad, 4), std::invalid_argument);
  const PreparedEstimator ok(make_estimator_spec(EstimatorKind::map, paper_config(4)), 4);
  CHECK_THROWS_AS(ok.estimate(sample_observations(paper_config(3), vec({1, 2, 3}), 1)),
                  DimensionError);
}

TEST_CASE("ms_bias_diagnostic") {
  SUBCASE("MAP on the paper configuration") {
    const ModelPair pair = paper_config(10);
    const auto d = ms_bias_diagnostic(make_estimator_spec(EstimatorKind::map, pair), pair,
                                      vec({10, 20, 5}), 100000, 42);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(d.mean_error(k)) <= 4.0 * d.standard_error(k));
  }
  SUBCASE("matched flat QMLE") {
    const ModelPair pair = matched_flat_config(5);
    const auto d = ms_bias_diagnostic(make_estimator_spec(EstimatorKind::qmle, pair), pair,
                                      vec({-3, 0.5, 12}), 10000, 7);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(d.mean_error(k)) <= 4.0 * d.standard_error(k));
  }
  SUBCASE("zero-noise limit is deterministic") {
    ModelPair pair = paper_config(10);
    pair.true_lik.noise_covariance = 1e-30 * Matrix::Identity(3, 3);
    const auto d = ms_bias_diagnostic(make_estimator_spec(EstimatorKind::map, pair), pair,
                                      vec({10, 20, 5}), 100, 7);
    CHECK(d.mean_error.cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("too few trials") {
    const ModelPair pair = paper_config(2);
    CHECK_THROWS_AS(ms_bias_diagnostic(make_estimator_spec(EstimatorKind::map, pair), pair,
                                       vec({1, 2, 3}), 99, 1),
                    std::invalid_argument);
  }
}
