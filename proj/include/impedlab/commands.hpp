#ifndef IMPEDLAB_COMMANDS_HPP
#define IMPEDLAB_COMMANDS_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "impedlab/config.hpp"

namespace impedlab {

struct CommandOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

/// Forward solution for a configuration: series for a fully coated sphere
/// with constant impedance (unless forced to BIE), direct BIE otherwise.
ScatterSolution forward_solution(const ExperimentConfig& config, std::optional<double> lambda_override = {});

int cmd_solve(const ExperimentConfig& config, const std::string& out_dir);
int cmd_farfield(const ExperimentConfig& config, const std::string& out_dir);
int cmd_reconstruct(const ExperimentConfig& config, const std::string& out_dir);
/// which: lowerbound | vdoubling | sdoubling | threespheres | ap | psi0
int cmd_verify(const ExperimentConfig& config, const std::string& which, const std::string& out_dir);
int cmd_sweep(const ExperimentConfig& config, const std::string& out_dir);
int cmd_oracle_compare(const ExperimentConfig& config, const std::string& out_dir);

/// Loads the config, applies seed and thread overrides, runs the command and
/// turns failures into a one-line JSON error on `err`. Returns the exit status.
int run_command(const std::string& command, const std::string& which, const CommandOptions& options,
                std::ostream& err);

}  // namespace impedlab

#endif
