#include <exception>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "common.hpp"

namespace bnslab::cli {

const std::vector<Command>& commands() {
  static const std::vector<Command> all = {make_verify_gaussian(), make_corollary_scan(),
                                           make_toy2d(),           make_trajectory(),
                                           make_contraction(),     make_spectral(),
                                           make_ablation()};
  return all;
}

namespace {

std::string key_listing(const Schema& schema) {
  std::ostringstream ss;
  ss << "Settings (config file [section] key = value, or --section.key=value):\n";
  for (const KeyDef& k : schema) {
    ss << "  " << k.key << " = " << (k.default_value.empty() ? "(unset)" : k.default_value) << "\n"
       << "      " << k.help << "\n";
  }
  return ss.str();
}

// Applies leftover `--section.key=value` / `--section.key value` arguments.
void apply_flags(ExperimentConfig& cfg, const std::vector<std::string>& rest) {
  for (std::size_t k = 0; k < rest.size(); ++k) {
    const std::string& arg = rest[k];
    if (arg.rfind("--", 0) != 0 || arg.size() < 3) {
      throw ConfigError("unexpected argument '" + arg + "'");
    }
    const auto eq = arg.find('=');
    if (eq != std::string::npos) {
      cfg.set(arg.substr(2, eq - 2), arg.substr(eq + 1), "command line");
    } else {
      if (k + 1 >= rest.size()) throw ConfigError("flag '" + arg + "' has no value");
      cfg.set(arg.substr(2), rest[k + 1], "command line");
      ++k;
    }
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boost-and-skip minority sampling experiments", "bnslab"};
  app.require_subcommand(1);
  struct Bound {
    const Command* command;
    CLI::App* sub;
    std::string config_file;
    std::string out_dir;
  };
  std::vector<Bound> bound;
  bound.reserve(commands().size());
  for (const Command& c : commands()) {
    CLI::App* sub = app.add_subcommand(c.name, c.summary);
    sub->allow_extras();
    sub->footer(key_listing(c.schema));
    bound.push_back({&c, sub, {}, {}});
  }
  for (Bound& b : bound) {
    b.sub->add_option("--config", b.config_file, "config file with [section] key = value lines")
        ->check(CLI::ExistingFile);
    b.sub->add_option("--out", b.out_dir, "output directory")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }
  for (Bound& b : bound) {
    if (!b.sub->parsed()) continue;
    try {
      ExperimentConfig cfg(b.command->name, b.command->schema);
      if (!b.config_file.empty()) cfg.merge_file(b.config_file);
      apply_flags(cfg, b.sub->remaining());
      cfg.out_dir = b.out_dir;
      std::filesystem::create_directories(cfg.out_dir);
      return b.command->run(cfg, out);
    } catch (const std::exception& e) {
      err << "bnslab " << b.command->name << ": error: " << e.what() << "\n";
      return kExitError;
    }
  }
  return kExitError;
}

}  // namespace bnslab::cli
