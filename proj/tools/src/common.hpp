#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bnslab/bnslab.hpp"
#include "bnslab_cli/commands.hpp"

namespace bnslab::cli {

Command make_verify_gaussian();
Command make_corollary_scan();
Command make_toy2d();
Command make_trajectory();
Command make_contraction();
Command make_spectral();
Command make_ablation();

Schema join(std::initializer_list<Schema> parts);
Schema run_keys();
Schema schedule_keys();
Schema circles_keys();
Schema model_keys();

NoiseSchedule schedule_from(const ExperimentConfig& cfg);
CirclesSpec circles_from(const ExperimentConfig& cfg);
CirclesGeometry geometry_from(const ExperimentConfig& cfg, const CirclesSpec& spec);

/// Dynamics name from a config value ("stochastic" or "ode").
Dynamics dynamics_from(const ExperimentConfig& cfg, const std::string& key);

/// `auto` or empty -> the smallest skip with alpha above the recipe threshold.
int delta_from(const ExperimentConfig& cfg, const std::string& key, const NoiseSchedule& s);

/// Score field for the circles studies: the ring-mixture oracle, a network
/// loaded from model.load, or a freshly trained network (saved to model.save
/// when set; its loss curve goes to training_loss.csv).
ScoreField toy_field(const ExperimentConfig& cfg, const CirclesSpec& spec,
                     const NoiseSchedule& schedule, std::ostream& log);

/// Provenance comment lines: the subcommand and every resolved key.
std::vector<std::pair<std::string, std::string>> provenance(const ExperimentConfig& cfg);

/// Pass/fail checks of one run, written to checks.csv.
class CheckList {
 public:
  void add(std::string name, bool passed, double value, double threshold, std::string detail = {});
  bool all_passed() const;
  /// Logs every check and writes checks.csv; returns the exit status.
  int finish(const ExperimentConfig& cfg, std::ostream& log) const;

 private:
  struct Entry {
    std::string name;
    bool passed;
    double value;
    double threshold;
    std::string detail;
  };
  std::vector<Entry> entries_;
};

std::filesystem::path out_path(const ExperimentConfig& cfg, const std::string& file);

}  // namespace bnslab::cli
