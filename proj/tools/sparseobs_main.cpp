#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>

#include "sparseobs/run_config.hpp"

using namespace sparseobs::cli;

int main(int argc, char** argv) {
  CLI::App app{"Sparse robust observer synthesis and certification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string design_path;
  bool quiet = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (JSON)")
        ->required();
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Override the verification RNG seed");
    cmd->add_option("--samples", samples, "Override the sample count");
    cmd->add_flag("--quiet", quiet, "Suppress progress output");
  };

  CLI::App* design = app.add_subcommand("design", "Synthesize an observer");
  add_common(design);
  CLI::App* verify =
      app.add_subcommand("verify", "Certify an existing design file");
  add_common(verify);
  verify->add_option("--design", design_path, "Design document to certify")
      ->required();
  CLI::App* sweep =
      app.add_subcommand("sweep", "Design across a parameter grid");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (seed) {
      cfg.seed = *seed;
      cfg.options.rng_seed = *seed;
    }
    if (samples) cfg.n_samples = *samples;

    if (design->parsed()) return run_design(cfg, out_dir, quiet);
    if (verify->parsed()) return run_verify(cfg, design_path, out_dir, quiet);
    return run_sweep(cfg, out_dir, quiet);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
