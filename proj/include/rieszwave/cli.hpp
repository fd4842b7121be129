#ifndef RIESZWAVE_CLI_HPP
#define RIESZWAVE_CLI_HPP

#include <iosfwd>
#include <string>

#include "rieszwave/run_config.hpp"

namespace rieszwave {

/// Exit codes of the command line front-end.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitConvergence = 3 };

struct RunOptions {
  bool force = false;
  bool verbose = false;
};

/// Runs one subcommand into output_dir/run_id. An existing finished run is
/// left alone ("cached") unless force is set. Throws on failure.
int run_subcommand(const std::string& subcommand, const RunConfig& config, const RunOptions& options,
                   std::ostream& out, std::ostream& log);

/// rieszwave --config FILE [--force] [--workers N] [--verbose] SUBCOMMAND
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rieszwave

#endif  // RIESZWAVE_CLI_HPP
