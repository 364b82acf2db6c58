#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bnslab_cli/config.hpp"

namespace bnslab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

struct Command {
  std::string name;
  std::string summary;
  Schema schema;
  /// Writes artifacts under config.out_dir; returns kExitOk or kExitCheckFailed.
  /// Execution problems are thrown.
  std::function<int(const ExperimentConfig&, std::ostream& log)> run;
};

const std::vector<Command>& commands();

/// Full command line entry point: `bnslab <subcommand> [--config FILE]
/// [--section.key=value ...] --out DIR`. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bnslab::cli
