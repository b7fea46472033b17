#include <iostream>

#include "CLI11.hpp"
#include "impedlab/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Impedance obstacle scattering lab"};
  app.require_subcommand(1);

  impedlab::CommandOptions options;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string which;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", options.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", options.out_dir, "output directory")->required();
    cmd->add_option("--seed", seed, "overrides the config seed");
    cmd->add_option("--threads", threads, "worker threads (fallback: IMPEDLAB_THREADS)")->check(CLI::NonNegativeNumber);
  };

  for (const char* name : {"solve", "farfield", "reconstruct", "sweep", "oracle-compare"})
    add_common(app.add_subcommand(name));
  auto* verify = app.add_subcommand("verify", "quantitative checks");
  verify->add_option("which", which, "lowerbound | vdoubling | sdoubling | threespheres | ap | psi0")
      ->required()
      ->check(CLI::IsMember({"lowerbound", "vdoubling", "sdoubling", "threespheres", "ap", "psi0"}));
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* cmd = app.get_subcommands().front();
  if (cmd->count("--seed")) options.seed = seed;
  if (cmd->count("--threads")) options.threads = threads;
  return impedlab::run_command(cmd->get_name(), which, options, std::cerr);
}
