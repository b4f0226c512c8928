#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wegnerlab/errors.hpp"
#include "wegnerlab/runner.hpp"

namespace {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<int> n_realizations;
  std::optional<std::string> output_dir;
  std::optional<double> b_factor;
  std::optional<int> dump_fields;
  std::optional<std::string> fields_dir;
};

void apply(const CliOverrides& cli, wegnerlab::ExperimentConfig& config) {
  if (cli.seed) config.master_seed = *cli.seed;
  if (cli.threads) {
    if (*cli.threads < 1) throw wegnerlab::ConfigError("threads must be >= 1");
    config.overrides.threads = *cli.threads;
  }
  if (cli.n_realizations) {
    if (*cli.n_realizations < 1)
      throw wegnerlab::ConfigError("n_realizations must be >= 1");
    config.n_realizations = *cli.n_realizations;
  }
  if (cli.output_dir) config.output_dir = *cli.output_dir;
  if (cli.b_factor) {
    if (!(*cli.b_factor > 0.0) || *cli.b_factor > 1.0)
      throw wegnerlab::ConfigError("b factor must lie in (0, 1]");
    config.overrides.b_factor = *cli.b_factor;
  }
  if (cli.dump_fields) config.dump_fields = *cli.dump_fields;
  if (cli.fields_dir) config.fields_dir = *cli.fields_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Spectral statistics of lattice Schrodinger operators with Gaussian "
      "random potentials"};
  app.require_subcommand(1);

  std::string config_path;
  CliOverrides cli;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--seed", cli.seed, "override master seed");
    cmd->add_option("--threads", cli.threads, "worker threads");
    cmd->add_option("--n-realizations", cli.n_realizations,
                    "override realization count");
    cmd->add_option("--output-dir", cli.output_dir, "override output dir");
  };

  auto* cert = app.add_subcommand(
      "certificate", "build and verify the exponential-measure certificate");
  add_common(cert);
  cert->add_option("--b-factor", cli.b_factor,
                   "scale the decay rate below its maximal value, in (0,1]");

  auto* ids = app.add_subcommand(
      "ids", "Monte Carlo eigenvalue counting curves and window constants");
  add_common(ids);

  auto* sample = app.add_subcommand(
      "sample-check", "validate sampled fields against the covariance");
  add_common(sample);
  sample->add_option("--dump-fields", cli.dump_fields,
                     "dump the first N realizations");
  sample->add_option("--fields", cli.fields_dir,
                     "validate previously dumped fields from this directory");

  auto* spectrum = app.add_subcommand(
      "spectrum", "dense eigenvalues of one realization (small instances)");
  add_common(spectrum);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return wegnerlab::kExitUsage;
  }

  int (*command)(const wegnerlab::ExperimentConfig&, std::ostream&) = nullptr;
  if (cert->parsed()) command = wegnerlab::run_certificate;
  if (ids->parsed()) command = wegnerlab::run_ids;
  if (sample->parsed()) command = wegnerlab::run_sample_check;
  if (spectrum->parsed()) command = wegnerlab::run_spectrum;

  try {
    wegnerlab::ExperimentConfig config =
        wegnerlab::ExperimentConfig::load(config_path);
    apply(cli, config);
    return wegnerlab::run_guarded(command, config, std::cout, std::cerr);
  } catch (const wegnerlab::ConfigError& ex) {
    std::cerr << "usage error: " << ex.what() << "\n";
    return wegnerlab::kExitUsage;
  } catch (const wegnerlab::ModelError& ex) {
    std::cerr << "model error: " << ex.what() << "\n";
    return wegnerlab::kExitModelError;
  }
}
