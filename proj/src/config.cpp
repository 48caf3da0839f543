#include "mbcrb/config.hpp"

#include "mbcrb/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace mbcrb {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required field");
  return *it;
}

double get_number(const json& value, const std::string& path) {
  if (!value.is_number()) throw ConfigError(path, "expected a number");
  const double v = value.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
  return v;
}

long long get_integer(const json& value, const std::string& path) {
  if (!value.is_number_integer()) throw ConfigError(path, "expected an integer");
  return value.get<long long>();
}

Vector get_vector(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) throw ConfigError(path, "expected a non-empty array");
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = get_number(value[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix get_matrix(const json& value, const std::string& path) {
  if (!value.is_array() || value.empty()) {
    throw ConfigError(path, "expected a non-empty array of rows");
  }
  const std::size_t rows = value.size();
  if (!value[0].is_array() || value[0].empty()) {
    throw ConfigError(path + "[0]", "expected a non-empty row");
  }
  const std::size_t cols = value[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!value[i].is_array() || value[i].size() != cols) {
      throw ConfigError(row_path, "rows must all have " + std::to_string(cols) + " entries");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          get_number(value[i][j], row_path + "[" + std::to_string(j) + "]");
    }
  }
  return m;
}

double positive(const json& obj, const std::string& path, const std::string& key) {
  const double v = get_number(require(obj, path, key), join(path, key));
  if (!(v > 0.0)) throw ConfigError(join(path, key), "must be positive");
  return v;
}

// Noise covariance; `nx` is the observation dimension if known from H, else 0.
Matrix parse_noise(const json& noise, const std::string& path, Eigen::Index nx_hint,
                   Eigen::Index fallback_nx) {
  if (!noise.is_object() || noise.size() != 1) {
    throw ConfigError(path, "expected exactly one of \"ar1\", \"matrix\", \"var_scalar\"");
  }
  if (noise.contains("matrix")) return get_matrix(noise["matrix"], join(path, "matrix"));
  const Eigen::Index nx = nx_hint > 0 ? nx_hint : fallback_nx;
  if (noise.contains("var_scalar")) {
    const double v = positive(noise, path, "var_scalar");
    return v * Matrix::Identity(nx, nx);
  }
  if (noise.contains("ar1")) {
    const std::string ar1_path = join(path, "ar1");
    const json& ar1 = noise["ar1"];
    const double rho = get_number(require(ar1, ar1_path, "rho"), join(ar1_path, "rho"));
    if (!(std::abs(rho) < 1.0)) throw ConfigError(join(ar1_path, "rho"), "out of range");
    const double sigma_sq = positive(ar1, ar1_path, "sigma_sq");
    return build_ar1_covariance(rho, static_cast<int>(nx), sigma_sq);
  }
  throw ConfigError(path, "expected exactly one of \"ar1\", \"matrix\", \"var_scalar\"");
}

struct ParsedModel {
  std::optional<GaussianDensity> prior;
  LinearGaussianLikelihood lik;
};

ParsedModel parse_model(const json& section, const std::string& path, bool allow_flat,
                        Eigen::Index fallback_nx) {
  if (!section.is_object()) throw ConfigError(path, "expected an object");
  ParsedModel out;

  const json& mean_json = require(section, path, "prior_mean");
  const bool flat = mean_json.is_string();
  if (flat && (!allow_flat || mean_json.get<std::string>() != "flat")) {
    throw ConfigError(join(path, "prior_mean"),
                      allow_flat ? "expected an array or \"flat\"" : "expected an array");
  }

  const bool has_h = section.contains("H");
  const bool has_h_scalar = section.contains("h_scalar");
  if (has_h == has_h_scalar) {
    throw ConfigError(path, "expected exactly one of \"H\" or \"h_scalar\"");
  }
  std::optional<Matrix> h_matrix;
  if (has_h) h_matrix = get_matrix(section["H"], join(path, "H"));

  Eigen::Index n_param = 0;
  Vector mean;
  if (!flat) {
    mean = get_vector(mean_json, join(path, "prior_mean"));
    n_param = mean.size();
  } else if (h_matrix) {
    n_param = h_matrix->cols();
  }

  const json& noise_json = require(section, path, "noise");
  Eigen::Index nx_hint = h_matrix ? h_matrix->rows() : 0;
  if (nx_hint == 0 && noise_json.is_object() && noise_json.contains("matrix")) {
    nx_hint = static_cast<Eigen::Index>(noise_json["matrix"].size());
  }
  if (nx_hint == 0) nx_hint = n_param > 0 ? n_param : fallback_nx;
  if (n_param == 0) n_param = nx_hint;
  if (nx_hint <= 0) throw ConfigError(path, "cannot infer the observation dimension");

  out.lik.noise_covariance = parse_noise(noise_json, join(path, "noise"), nx_hint, nx_hint);
  if (h_matrix) {
    out.lik.observation_matrix = *h_matrix;
  } else {
    const double h = get_number(section["h_scalar"], join(path, "h_scalar"));
    out.lik.observation_matrix = h * Matrix::Identity(nx_hint, n_param);
  }

  if (!flat) {
    const bool has_cov = section.contains("prior_cov");
    const bool has_var = section.contains("prior_var_scalar");
    if (has_cov == has_var) {
      throw ConfigError(path, "expected exactly one of \"prior_cov\" or \"prior_var_scalar\"");
    }
    Matrix cov = has_cov ? get_matrix(section["prior_cov"], join(path, "prior_cov"))
                         : positive(section, path, "prior_var_scalar") *
                               Matrix::Identity(n_param, n_param);
    out.prior = GaussianDensity{mean, cov};
  } else if (section.contains("prior_cov") || section.contains("prior_var_scalar")) {
    throw ConfigError(join(path, "prior_mean"), "a flat prior takes no covariance");
  }
  return out;
}

std::vector<double> parse_grid(const json& sweep, const std::string& path) {
  const bool has_grid = sweep.contains("grid");
  const bool has_range = sweep.contains("range");
  if (has_grid == has_range) {
    throw ConfigError(path, "expected exactly one of \"grid\" or \"range\"");
  }
  std::vector<double> grid;
  if (has_grid) {
    const Vector v = get_vector(sweep["grid"], join(path, "grid"));
    grid.assign(v.data(), v.data() + v.size());
    return grid;
  }
  const std::string range_path = join(path, "range");
  const json& range = sweep["range"];
  const double start = get_number(require(range, range_path, "start"), join(range_path, "start"));
  const double stop = get_number(require(range, range_path, "stop"), join(range_path, "stop"));
  const double step = positive(range, range_path, "step");
  if (stop < start) throw ConfigError(join(range_path, "stop"), "must be >= start");
  // Inclusive of stop up to rounding in (stop - start) / step.
  const auto count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1000000) throw ConfigError(range_path, "too many grid points");
  for (long long i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
  return grid;
}

std::string section_for(const std::string& entry) {
  if (entry.rfind("true", 0) == 0) return "true_model";
  if (entry.rfind("assumed", 0) == 0) return "assumed_model";
  if (entry.rfind("observation", 0) == 0) return "assumed_model.H";
  return "experiment";
}

}  // namespace

ExperimentConfig parse_config(const json& document) {
  if (!document.is_object()) throw ConfigError("<document>", "expected a JSON object");
  ExperimentConfig config;

  const ParsedModel truth = parse_model(require(document, "", "true_model"), "true_model",
                                        /*allow_flat=*/false, 0);
  const ParsedModel assumed =
      parse_model(require(document, "", "assumed_model"), "assumed_model", /*allow_flat=*/true,
                  truth.lik.observation_dim());
  config.pair.true_prior = *truth.prior;
  config.pair.true_lik = truth.lik;
  config.pair.assumed_prior = assumed.prior;
  config.pair.assumed_lik = assumed.lik;

  const json& exp = require(document, "", "experiment");
  const long long n = get_integer(require(exp, "experiment", "n_samples"), "experiment.n_samples");
  if (n < 1 || n > std::numeric_limits<int>::max()) {
    throw ConfigError("experiment.n_samples", "must be an integer >= 1");
  }
  config.pair.n_samples = static_cast<int>(n);

  const long long trials = get_integer(require(exp, "experiment", "trials"), "experiment.trials");
  if (trials < 100 || trials > std::numeric_limits<int>::max()) {
    throw ConfigError("experiment.trials", "must be an integer >= 100");
  }
  config.trials = static_cast<int>(trials);

  const json& seed = require(exp, "experiment", "master_seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    throw ConfigError("experiment.master_seed", "expected a non-negative 64-bit integer");
  }
  config.master_seed = seed.get<std::uint64_t>();

  const json& ref = require(exp, "experiment", "error_reference");
  const auto parsed_ref = ref.is_string() ? parse_error_reference(ref.get<std::string>())
                                          : std::nullopt;
  if (!parsed_ref) {
    throw ConfigError("experiment.error_reference",
                      "expected \"pseudotrue\" or \"true-parameter\"");
  }
  config.error_reference = *parsed_ref;

  if (exp.contains("estimator")) {
    const json& kind = exp["estimator"];
    if (kind == "map") {
      config.estimator = EstimatorKind::map;
    } else if (kind == "qmle") {
      config.estimator = EstimatorKind::qmle;
    } else {
      throw ConfigError("experiment.estimator", "expected \"map\" or \"qmle\"");
    }
  }
  if (exp.contains("threads")) {
    const long long threads = get_integer(exp["threads"], "experiment.threads");
    if (threads < 0 || threads > 4096) throw ConfigError("experiment.threads", "out of range");
    config.threads = static_cast<int>(threads);
  }

  const json& sweep = require(exp, "experiment", "sweep");
  const json& axis = require(sweep, "experiment.sweep", "axis");
  const auto parsed_axis = axis.is_string() ? parse_sweep_axis(axis.get<std::string>())
                                            : std::nullopt;
  if (!parsed_axis) {
    throw ConfigError("experiment.sweep.axis", "expected \"N\", \"h\" or \"sigma_sq\"");
  }
  config.sweep.axis = *parsed_axis;
  config.sweep.grid = parse_grid(sweep, "experiment.sweep");

  for (const auto& entry : validate_model_pair(config.pair)) {
    const bool numerical = entry.find("positive definite") != std::string::npos ||
                           entry.find("not symmetric") != std::string::npos;
    if (!numerical) throw ConfigError(section_for(entry), entry);
  }
  try {
    validate_experiment_config(config);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const std::string path = what.find("grid") != std::string::npos ? "experiment.sweep.grid"
                             : what.find("reference") != std::string::npos
                                 ? "experiment.error_reference"
                                 : "experiment";
    throw ConfigError(path, what);
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json document;
  try {
    document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (document.is_object() && document.contains("config") && !document.contains("true_model")) {
    return parse_config(document["config"]);
  }
  return parse_config(document);
}

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

json to_json(const ExperimentConfig& config) {
  const ModelPair& pair = config.pair;
  json doc;
  doc["true_model"] = {
      {"prior_mean", vector_json(pair.true_prior.mean)},
      {"prior_cov", matrix_json(pair.true_prior.covariance)},
      {"H", matrix_json(pair.true_lik.observation_matrix)},
      {"noise", {{"matrix", matrix_json(pair.true_lik.noise_covariance)}}},
  };
  json assumed = {
      {"H", matrix_json(pair.assumed_lik.observation_matrix)},
      {"noise", {{"matrix", matrix_json(pair.assumed_lik.noise_covariance)}}},
  };
  if (pair.assumed_prior) {
    assumed["prior_mean"] = vector_json(pair.assumed_prior->mean);
    assumed["prior_cov"] = matrix_json(pair.assumed_prior->covariance);
  } else {
    assumed["prior_mean"] = "flat";
  }
  doc["assumed_model"] = assumed;
  doc["experiment"] = {
      {"n_samples", pair.n_samples},
      {"trials", config.trials},
      {"master_seed", config.master_seed},
      {"error_reference", std::string(error_reference_name(config.error_reference))},
      {"estimator", std::string(estimator_kind_name(config.estimator))},
      {"threads", config.threads},
      {"sweep",
       {{"axis", std::string(sweep_axis_name(config.sweep.axis))}, {"grid", config.sweep.grid}}},
  };
  return doc;
}

bool equivalent(const ExperimentConfig& a, const ExperimentConfig& b) {
  auto same_density = [](const GaussianDensity& x, const GaussianDensity& y) {
    return x.mean.size() == y.mean.size() && x.mean == y.mean &&
           x.covariance.rows() == y.covariance.rows() &&
           x.covariance.cols() == y.covariance.cols() && x.covariance == y.covariance;
  };
  auto same_lik = [](const LinearGaussianLikelihood& x, const LinearGaussianLikelihood& y) {
    return x.observation_matrix.rows() == y.observation_matrix.rows() &&
           x.observation_matrix.cols() == y.observation_matrix.cols() &&
           x.observation_matrix == y.observation_matrix &&
           x.noise_covariance.rows() == y.noise_covariance.rows() &&
           x.noise_covariance == y.noise_covariance;
  };
  const ModelPair& p = a.pair;
  const ModelPair& q = b.pair;
  if (!same_density(p.true_prior, q.true_prior) || !same_lik(p.true_lik, q.true_lik) ||
      !same_lik(p.assumed_lik, q.assumed_lik) || p.n_samples != q.n_samples) {
    return false;
  }
  if (p.assumed_prior.has_value() != q.assumed_prior.has_value()) return false;
  if (p.assumed_prior && !same_density(*p.assumed_prior, *q.assumed_prior)) return false;
  return a.estimator == b.estimator && a.trials == b.trials && a.master_seed == b.master_seed &&
         a.error_reference == b.error_reference && a.sweep.axis == b.sweep.axis &&
         a.sweep.grid == b.sweep.grid && a.threads == b.threads;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  json doc = to_json(config);
  doc["experiment"].erase("threads");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mbcrb
