#include "mbcrb/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Misspecified Bayesian Cramer-Rao bounds for linear-Gaussian models"};
  app.require_subcommand(1);

  mbcrb::BoundOptions bound;
  auto* bound_cmd = app.add_subcommand("bound", "Closed-form bounds for a configuration");
  bound_cmd->add_option("--config", bound.config_path, "JSON configuration")->required();
  bound_cmd->add_option("--out", bound.out_dir, "Output directory")->required();

  mbcrb::RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Monte Carlo sweep with CSV and SVG output");
  run_cmd->add_option("--config", run.config_path, "JSON configuration or run manifest")
      ->required();
  run_cmd->add_option("--out", run.out_dir, "Output directory")->required();
  run_cmd->add_option("--trials", run.trials, "Override experiment.trials");
  run_cmd->add_option("--seed", run.seed, "Override experiment.master_seed");
  run_cmd->add_option("--threads", run.threads, "Worker threads (0: all cores)");
  run_cmd->add_option("--kernels", run.kernels, "Force a kernel variant: scalar, avx2, neon");

  mbcrb::PseudotrueOptions pseudo;
  std::string pseudo_out;
  auto* pseudo_cmd =
      app.add_subcommand("pseudotrue", "Closed-form and numeric pseudotrue parameter");
  pseudo_cmd->add_option("--config", pseudo.config_path, "JSON configuration")->required();
  pseudo_cmd->add_option("--psi", pseudo.psi, "True parameter value(s)")->required();
  pseudo_cmd->add_option("--out", pseudo_out, "Output directory for pseudotrue.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mbcrb::kExitConfigError;
  }

  if (*bound_cmd) return mbcrb::cmd_bound(bound, std::cout, std::cerr);
  if (*run_cmd) return mbcrb::cmd_run(run, std::cout, std::cerr);
  if (!pseudo_out.empty()) pseudo.out_dir = pseudo_out;
  return mbcrb::cmd_pseudotrue(pseudo, std::cout, std::cerr);
}
