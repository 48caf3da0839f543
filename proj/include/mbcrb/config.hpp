#pragma once

// JSON experiment configuration.
//
//   {
//     "true_model": {
//       "prior_mean": [10, 20, 5],
//       "prior_cov": [[...]] | "prior_var_scalar": 0.5,
//       "H": [[...]] | "h_scalar": 1.0,
//       "noise": {"ar1": {"rho": 0.5, "sigma_sq": 0.04}} | {"matrix": [[...]]}
//                | {"var_scalar": 0.1}
//     },
//     "assumed_model": { same keys; "prior_mean": "flat" for a flat prior },
//     "experiment": {
//       "n_samples": 40, "trials": 10000, "master_seed": 1,
//       "error_reference": "pseudotrue" | "true-parameter",
//       "estimator": "map" | "qmle", "threads": 0,
//       "sweep": {"axis": "N" | "h" | "sigma_sq",
//                 "grid": [...] | "range": {"start": 1, "stop": 40, "step": 1}}
//     }
//   }
//
// Dimensions are inferred: n_param from prior_mean (or H's columns for a flat
// prior), n_x from H's rows, else the noise matrix, else n_param.

#include "mbcrb/experiment.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace mbcrb {

/// Parse or validation failure addressed by a dotted path into the document.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

ExperimentConfig parse_config(const nlohmann::json& document);

/// Reads a config file. A run manifest is accepted as well; its embedded
/// "config" document is used.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical document with every matrix written out explicitly.
nlohmann::json to_json(const ExperimentConfig& config);

bool equivalent(const ExperimentConfig& a, const ExperimentConfig& b);

/// FNV-1a over the canonical document, excluding the thread count.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace mbcrb
