#pragma once

// Implementations of the `mbcrb` subcommands. They report through the given
// streams and return the process exit code, so tests can drive them
// in-process.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mbcrb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNumericalError = 2;

struct BoundOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
};

struct RunOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> kernels;
};

struct PseudotrueOptions {
  std::filesystem::path config_path;
  std::vector<double> psi;
  std::optional<std::filesystem::path> out_dir;
};

/// Writes bound.csv and bound_summary.txt into out_dir.
int cmd_bound(const BoundOptions& options, std::ostream& out, std::ostream& err);

/// Writes sweep.csv, sweep_trace.csv, plot_component_<k>.svg and
/// manifest.json into out_dir. Nothing is left behind on failure.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Prints closed-form and numeric pseudotrue values; writes pseudotrue.csv
/// when out_dir is given.
int cmd_pseudotrue(const PseudotrueOptions& options, std::ostream& out, std::ostream& err);

}  // namespace mbcrb
