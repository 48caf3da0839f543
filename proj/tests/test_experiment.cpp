#include "mbcrb/experiment.hpp"

#include "mbcrb/kernels.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace mbcrb;
using namespace mbcrb::testing;

namespace {

ExperimentConfig base_config(ModelPair pair, ErrorReference ref, SweepSpec sweep, int trials) {
  ExperimentConfig c;
  c.pair = std::move(pair);
  c.trials = trials;
  c.master_seed = 12345;
  c.error_reference = ref;
  c.sweep = std::move(sweep);
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("validate_experiment_config") {
  ExperimentConfig c = base_config(paper_config(4), ErrorReference::pseudotrue,
                                   {SweepAxis::sample_count, {1, 2}}, 100);
  CHECK_NOTHROW(validate_experiment_config(c));
  c.trials = 99;
  CHECK_THROWS_AS(validate_experiment_config(c), std::invalid_argument);
  c.trials = 100;
  c.sweep.grid = {2, 1};
  CHECK_THROWS_AS(validate_experiment_config(c), std::invalid_argument);
  c.sweep.grid = {1.5};
  CHECK_THROWS_AS(validate_experiment_config(c), std::invalid_argument);
  c.sweep.grid = {};
  CHECK_THROWS_AS(validate_experiment_config(c), std::invalid_argument);
}

TEST_CASE("apply_axis_value") {
  const ModelPair pair = paper_config(4);
  CHECK(apply_axis_value(pair, SweepAxis::sample_count, 17).n_samples == 17);
  CHECK(apply_axis_value(pair, SweepAxis::assumed_gain, 0.7).assumed_lik.observation_matrix ==
        0.7 * Matrix::Identity(3, 3));
  CHECK(apply_axis_value(pair, SweepAxis::assumed_noise_variance, 0.2).assumed_lik.noise_covariance ==
        0.2 * Matrix::Identity(3, 3));
}

TEST_CASE("run_trial") {
  SUBCASE("zero noise, matched, flat prior") {
    ModelPair pair = matched_flat_config(3);
    pair.true_lik.noise_covariance = 1e-30 * Matrix::Identity(3, 3);
    pair.assumed_lik.noise_covariance = Matrix::Identity(3, 3);
    for (ErrorReference ref : {ErrorReference::pseudotrue, ErrorReference::true_parameter}) {
      const auto c = base_config(pair, ref, {SweepAxis::sample_count, {3}}, 100);
      CHECK(run_trial(c, 3, 0).cwiseAbs().maxCoeff() <= 1e-20);
    }
  }
  SUBCASE("determinism and shape") {
    const auto c = base_config(paper_config(10), ErrorReference::pseudotrue,
                               {SweepAxis::sample_count, {5, 10}}, 100);
    const Vector a = run_trial(c, 10, 7);
    CHECK(a.size() == 3);
    CHECK(a.allFinite());
    CHECK(a == run_trial(c, 10, 7));
    CHECK(a != run_trial(c, 10, 8));
    CHECK(a != run_trial(c, 5, 7));
    CHECK_THROWS_AS(run_trial(c, 6, 0), std::invalid_argument);
  }
}

TEST_CASE("minimal sweep") {
  const auto c = base_config(paper_config(1), ErrorReference::pseudotrue,
                             {SweepAxis::sample_count, {1}}, 100);
  const auto results = run_sweep(c);
  REQUIRE(results.size() == 1);
  const SweepResult& r = results[0];
  CHECK(r.axis_value == 1);
  for (const Vector* v : {&r.rmse, &r.rmse_standard_error, &r.bound_rmse_floor, &r.bcrb_floor}) {
    CHECK(v->size() == 3);
    CHECK(v->allFinite());
    CHECK((v->array() >= 0).all());
  }
  CHECK(std::isfinite(r.trace_rmse));
}

TEST_CASE("sweep results do not depend on thread count or kernel variant") {
  auto c = base_config(paper_config(1), ErrorReference::true_parameter,
                       {SweepAxis::sample_count, {1, 7, 12}}, 1000);
  const auto one = run_sweep(c);
  c.threads = 4;
  const auto four = run_sweep(c);
  const kernels::Isa original = kernels::active().isa;
  kernels::set_active(kernels::Isa::scalar);
  const auto scalar = run_sweep(c);
  kernels::set_active(original);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].rmse == four[i].rmse);
    CHECK(one[i].rmse_standard_error == four[i].rmse_standard_error);
    CHECK(one[i].rmse == scalar[i].rmse);
    CHECK(one[i].trace_rmse == scalar[i].trace_rmse);
  }
}

TEST_CASE("doubling trials shrinks the standard error by about 1/sqrt(2)") {
  auto c = base_config(paper_config(10), ErrorReference::pseudotrue,
                       {SweepAxis::sample_count, {10}}, 20000);
  const SweepResult small = run_sweep(c)[0];
  c.trials = 40000;
  const SweepResult large = run_sweep(c)[0];
  for (int k = 0; k < 3; ++k) {
    const double ratio = large.rmse_standard_error(k) / small.rmse_standard_error(k);
    CHECK(std::abs(ratio - 1.0 / std::sqrt(2.0)) <= 0.2 / std::sqrt(2.0));
  }
}

TEST_CASE("bound gates hold on the pseudotrue and true-parameter references") {
  for (ErrorReference ref : {ErrorReference::pseudotrue, ErrorReference::true_parameter}) {
    const auto c = base_config(paper_config(1), ref, {SweepAxis::sample_count, {1, 3, 10, 40}}, 5000);
    for (const SweepResult& r : run_sweep(c)) {
      for (int k = 0; k < 3; ++k) CHECK(bound_holds(r, k));
    }
  }
}

TEST_CASE("grid point failure names the axis value") {
  ModelPair pair = matched_flat_config(3);
  auto c = base_config(pair, ErrorReference::pseudotrue, {SweepAxis::assumed_gain, {0.5, 1.0}}, 100);
  c.pair.assumed_lik.observation_matrix = Matrix::Identity(3, 3);
  c.sweep.axis = SweepAxis::assumed_noise_variance;
  c.sweep.grid = {1.0};
  c.estimator = EstimatorKind::qmle;
  c.pair.assumed_prior = isotropic(vec({0, 0, 0}), 1.0);
  // qmle ignores the prior; a rank-deficient H through the true model's
  // observation matrix would not fail, so break the assumed H instead.
  c.pair.assumed_lik.observation_matrix.col(0).setZero();
  try {
    run_sweep(c);
    FAIL("expected failure");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("sigma_sq=1") != std::string::npos);
  }
}
