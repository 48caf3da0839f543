#include "mbcrb/model.hpp"

#include "mbcrb/kernels.hpp"
#include "mbcrb/rng.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mbcrb {

Matrix build_ar1_covariance(double rho, int n, double sigma_sq) {
  if (!(std::abs(rho) < 1.0)) {
    throw std::invalid_argument("AR-1 correlation must satisfy |rho| < 1");
  }
  if (!(sigma_sq > 0.0)) {
    throw std::invalid_argument("AR-1 variance must be positive");
  }
  if (n < 1) {
    throw std::invalid_argument("AR-1 dimension must be at least 1");
  }
  Matrix q(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      q(i, j) = sigma_sq * std::pow(rho, std::abs(i - j));
    }
  }
  return q;
}

namespace {

void check_covariance(const Matrix& cov, const std::string& name,
                      std::vector<std::string>& report) {
  if (cov.rows() != cov.cols()) {
    report.push_back(name + " not square");
    return;
  }
  if (cov.size() == 0) {
    report.push_back(name + " is empty");
    return;
  }
  if (!cov.allFinite()) {
    report.push_back(name + " has non-finite entries");
    return;
  }
  if (!is_symmetric(cov)) {
    report.push_back(name + " not symmetric");
    return;
  }
  try {
    SpdFactor factor(cov, name);
  } catch (const NumericalError&) {
    report.push_back(name + " not positive definite");
  }
}

void check_density(const GaussianDensity& d, const std::string& name,
                   std::vector<std::string>& report) {
  if (!d.mean.allFinite()) report.push_back(name + ".mean has non-finite entries");
  if (d.mean.size() != d.covariance.rows()) {
    std::ostringstream os;
    os << name << " dimension mismatch: mean length " << d.mean.size() << " vs covariance "
       << d.covariance.rows() << "x" << d.covariance.cols();
    report.push_back(os.str());
  }
  check_covariance(d.covariance, name + ".covariance", report);
}

void check_likelihood(const LinearGaussianLikelihood& lik, const std::string& name,
                      std::vector<std::string>& report) {
  if (!lik.observation_matrix.allFinite()) {
    report.push_back(name + ".observation_matrix has non-finite entries");
  }
  if (lik.observation_matrix.rows() != lik.noise_covariance.rows()) {
    std::ostringstream os;
    os << name << " dimension mismatch: observation_matrix has " << lik.observation_matrix.rows()
       << " rows but noise_covariance is " << lik.noise_covariance.rows() << "x"
       << lik.noise_covariance.cols();
    report.push_back(os.str());
  }
  check_covariance(lik.noise_covariance, name + ".noise_covariance", report);
}

}  // namespace

std::vector<std::string> validate_model_pair(const ModelPair& pair) {
  std::vector<std::string> report;
  check_density(pair.true_prior, "true_prior", report);
  check_likelihood(pair.true_lik, "true_lik", report);
  check_likelihood(pair.assumed_lik, "assumed_lik", report);
  if (pair.assumed_prior) {
    check_density(*pair.assumed_prior, "assumed_prior", report);
    if (pair.assumed_prior->mean.size() != pair.assumed_lik.parameter_dim()) {
      std::ostringstream os;
      os << "assumed parameter dimension mismatch: assumed_prior has "
         << pair.assumed_prior->mean.size() << " entries, assumed_lik.observation_matrix has "
         << pair.assumed_lik.parameter_dim() << " columns";
      report.push_back(os.str());
    }
  }
  if (pair.true_lik.parameter_dim() != pair.true_prior.mean.size()) {
    std::ostringstream os;
    os << "true parameter dimension mismatch: true_prior has " << pair.true_prior.mean.size()
       << " entries, true_lik.observation_matrix has " << pair.true_lik.parameter_dim()
       << " columns";
    report.push_back(os.str());
  }
  if (pair.true_lik.observation_dim() != pair.assumed_lik.observation_dim()) {
    std::ostringstream os;
    os << "observation dimension mismatch: true_lik has " << pair.true_lik.observation_dim()
       << " rows, assumed_lik has " << pair.assumed_lik.observation_dim();
    report.push_back(os.str());
  }
  if (pair.n_samples < 1) report.push_back("n_samples must be >= 1");
  return report;
}

Vector sample_parameter(const GaussianDensity& prior, std::uint64_t rng_seed) {
  const SpdFactor factor(prior.covariance, "prior covariance");
  if (prior.mean.size() != factor.dim()) {
    throw DimensionError("prior mean length does not match covariance dimension");
  }
  rng::NormalStream normals(rng_seed);
  Vector z(prior.mean.size());
  normals.fill({z.data(), static_cast<std::size_t>(z.size())});
  return prior.mean + factor.lower() * z;
}

ObservationBatch sample_observations(const ModelPair& pair, const Vector& psi,
                                     std::uint64_t rng_seed) {
  const PreparedPair prepared(pair);
  std::vector<double> noise;
  ObservationBatch batch;
  sample_observations_into(prepared, psi, rng_seed, noise, batch);
  return batch;
}

void sample_observations_into(const PreparedPair& prepared, const Vector& psi,
                              std::uint64_t rng_seed, std::vector<double>& noise,
                              ObservationBatch& batch) {
  const ModelPair& pair = prepared.pair();
  if (psi.size() != pair.true_dim()) {
    throw DimensionError("psi length does not match the true parameter dimension");
  }
  const auto nx = static_cast<std::size_t>(pair.observation_dim());
  const auto count = static_cast<std::size_t>(pair.n_samples);

  // Draw order: observation by observation, component by component.
  noise.resize(nx * count);
  rng::NormalStream normals(rng_seed);
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t i = 0; i < nx; ++i) noise[i * count + n] = normals.next();
  }

  const Vector mean = pair.true_lik.observation_matrix * psi;
  if (batch.samples.rows() != static_cast<Eigen::Index>(nx) ||
      batch.samples.cols() != static_cast<Eigen::Index>(count)) {
    batch.samples.resize(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(count));
  }
  kernels::lower_affine_rows(prepared.true_noise_lower_rowmajor(),
                             {mean.data(), nx}, noise, {batch.samples.data(), nx * count}, nx);
  batch.generating_parameter = psi;
  batch.seed = rng_seed;
}

PreparedPair::PreparedPair(ModelPair pair) : pair_(std::move(pair)) {
  const auto report = validate_model_pair(pair_);
  if (!report.empty()) {
    std::string message = "invalid model pair:";
    bool numerical = true;
    for (const auto& entry : report) {
      message += " " + entry + ";";
      if (entry.find("not positive definite") == std::string::npos &&
          entry.find("not symmetric") == std::string::npos &&
          entry.find("non-finite") == std::string::npos) {
        numerical = false;
      }
    }
    if (numerical) throw NumericalError(message);
    throw DimensionError(message);
  }

  true_prior_ = SpdFactor(pair_.true_prior.covariance, "true_prior.covariance");
  true_noise_ = SpdFactor(pair_.true_lik.noise_covariance, "true_lik.noise_covariance");
  assumed_noise_ = SpdFactor(pair_.assumed_lik.noise_covariance, "assumed_lik.noise_covariance");

  const Matrix lower = true_noise_.lower();
  const auto nx = static_cast<std::size_t>(lower.rows());
  true_noise_lower_.assign(nx * nx, 0.0);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      true_noise_lower_[i * nx + j] =
          lower(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }

  const Eigen::Index ntheta = pair_.assumed_dim();
  if (pair_.assumed_prior) {
    const SpdFactor prior(pair_.assumed_prior->covariance, "assumed_prior.covariance");
    assumed_precision_ = prior.inverse();
    assumed_precision_mean_ = prior.solve(pair_.assumed_prior->mean);
  } else {
    assumed_precision_ = Matrix::Zero(ntheta, ntheta);
    assumed_precision_mean_ = Vector::Zero(ntheta);
  }
  assumed_ht_sigma_inv_ = assumed_noise_.solve(pair_.assumed_lik.observation_matrix).transpose();
}

}  // namespace mbcrb
