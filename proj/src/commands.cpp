#include "mbcrb/commands.hpp"

#include "mbcrb/bounds.hpp"
#include "mbcrb/config.hpp"
#include "mbcrb/experiment.hpp"
#include "mbcrb/kernels.hpp"
#include "mbcrb/pseudotrue_numeric.hpp"
#include "mbcrb/report.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace mbcrb {

namespace fs = std::filesystem;

namespace {

// Writes files into a directory and removes them all again unless commit()
// is reached.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_) fs::remove(dir_, ec);
  }

  void write(const std::string& name, const std::string& contents) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
    const fs::path path = dir_ / name;
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + path.string());
    written_.push_back(path);
    file << contents;
    if (!file) throw std::runtime_error("failed writing " + path.string());
  }

  void commit() { committed_ = true; }
  const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool created_dir_ = false;
  bool committed_ = false;
};

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumericalError;
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

int cmd_bound(const BoundOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = load_config(options.config_path);
    const PreparedPair model(config.pair);
    const BoundReport report = compute_bound_report(model);
    for (const Matrix* m : {&report.mbcrb, &report.bcrb}) {
      if (!is_bound_psd(*m)) throw NumericalError("bound matrix failed the PSD check");
    }

    std::ostringstream csv;
    write_bound_csv(csv, report);
    std::ostringstream summary;
    write_bound_summary(summary, report, snr_db(config.pair));

    OutputSet outputs(options.out_dir);
    outputs.write("bound.csv", csv.str());
    outputs.write("bound_summary.txt", summary.str());
    outputs.commit();
    out << summary.str();
    return kExitOk;
  });
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig config = load_config(options.config_path);
    if (options.trials) config.trials = *options.trials;
    if (options.seed) config.master_seed = *options.seed;
    if (options.threads) config.threads = *options.threads;
    if (options.kernels) {
      const auto isa = kernels::parse_isa(*options.kernels);
      if (!isa) throw ConfigError("--kernels", "expected scalar, avx2 or neon");
      if (!kernels::is_supported(*isa)) {
        throw ConfigError("--kernels", *options.kernels + " is not supported on this host");
      }
      kernels::set_active(*isa);
    }
    try {
      validate_experiment_config(config);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("experiment", e.what());
    }

    const std::vector<SweepResult> results = run_sweep(config);

    std::ostringstream sweep_csv;
    write_sweep_csv(sweep_csv, results, config.error_reference);
    std::ostringstream trace_csv;
    write_trace_csv(trace_csv, results);

    OutputSet outputs(options.out_dir);
    outputs.write("sweep.csv", sweep_csv.str());
    outputs.write("sweep_trace.csv", trace_csv.str());
    const Eigen::Index dim = config.pair.assumed_dim();
    nlohmann::json plot_files = nlohmann::json::array();
    for (Eigen::Index k = 0; k < dim; ++k) {
      const std::string name = "plot_component_" + std::to_string(k) + ".svg";
      outputs.write(name, render_component_plot(results, k, config.sweep.axis,
                                                config.error_reference));
      plot_files.push_back(name);
    }

    nlohmann::json manifest = {
        {"master_seed", config.master_seed},
        {"trials", config.trials},
        {"config_hash", hex64(config_hash(config))},
        {"threads", resolve_thread_count(config.threads)},
        {"kernels", std::string(kernels::isa_name(kernels::active().isa))},
        {"axis", std::string(sweep_axis_name(config.sweep.axis))},
        {"grid_points", config.sweep.grid.size()},
        {"outputs", nlohmann::json::array({"sweep.csv", "sweep_trace.csv"})},
        {"plots", plot_files},
        {"config", to_json(config)},
    };
    outputs.write("manifest.json", manifest.dump(2) + "\n");
    outputs.commit();

    out << "wrote " << results.size() << " grid points (" << config.trials
        << " trials each) to " << options.out_dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_pseudotrue(const PseudotrueOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ExperimentConfig config = load_config(options.config_path);
    if (static_cast<Eigen::Index>(options.psi.size()) != config.pair.true_dim()) {
      throw ConfigError("--psi", "expected " + std::to_string(config.pair.true_dim()) +
                                     " values, got " + std::to_string(options.psi.size()));
    }
    const Vector psi = Eigen::Map<const Vector>(options.psi.data(),
                                                static_cast<Eigen::Index>(options.psi.size()));
    const PreparedPair model(config.pair);
    const Vector closed_form = pseudotrue(model, psi);

    KlObjectiveSpec spec{config.pair, psi, KlEvaluationMode::analytic_expectation, 1, 0};
    const OptimizationResult numeric =
        minimize_kl(spec, Vector::Zero(config.pair.assumed_dim()));
    if (!numeric.converged) {
      throw NumericalError("KL minimisation did not converge: " + numeric.message);
    }
    const double max_diff = (closed_form - numeric.minimizer).cwiseAbs().maxCoeff();

    std::ostringstream csv;
    csv << "component_index,closed_form,numeric\n";
    for (Eigen::Index k = 0; k < closed_form.size(); ++k) {
      csv << k << ',' << format_number(closed_form(k)) << ','
          << format_number(numeric.minimizer(k)) << '\n';
    }
    if (options.out_dir) {
      OutputSet outputs(*options.out_dir);
      outputs.write("pseudotrue.csv", csv.str());
      outputs.commit();
    }
    out << "closed_form:";
    for (Eigen::Index k = 0; k < closed_form.size(); ++k) out << ' ' << format_number(closed_form(k));
    out << "\nnumeric:";
    for (Eigen::Index k = 0; k < closed_form.size(); ++k) {
      out << ' ' << format_number(numeric.minimizer(k));
    }
    out << "\nmax_abs_difference: " << format_number(max_diff) << '\n';
    return kExitOk;
  });
}

}  // namespace mbcrb
