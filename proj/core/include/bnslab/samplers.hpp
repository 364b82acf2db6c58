#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bnslab/dynamics.hpp"
#include "bnslab/linalg.hpp"
#include "bnslab/rng.hpp"
#include "bnslab/schedule.hpp"
#include "bnslab/score.hpp"

namespace bnslab {

enum class SamplerMode { standard, boost_skip, temperature };

const char* to_string(SamplerMode m) noexcept;
SamplerMode parse_sampler_mode(const std::string& text);
Dynamics parse_dynamics(const std::string& text);

struct SamplerConfig {
  SamplerMode mode = SamplerMode::standard;
  Dynamics dynamics = Dynamics::stochastic;
  double gamma = 1.0;
  int delta_skip = 0;
  double tau = 1.0;
  int n_samples = 1000;
  std::uint64_t seed = 0;

  /// Mode invariants: standard fixes (gamma, delta_skip, tau) = (1, 0, 1);
  /// temperature fixes (gamma, delta_skip) = (1, 0); boost_skip fixes tau = 1.
  void validate() const;

  static SamplerConfig standard(int n_samples, std::uint64_t seed,
                                Dynamics dynamics = Dynamics::stochastic);
  static SamplerConfig boost_skip(double gamma, int delta_skip, int n_samples, std::uint64_t seed,
                                  Dynamics dynamics = Dynamics::stochastic);
  static SamplerConfig temperature(double tau, int n_samples, std::uint64_t seed,
                                   Dynamics dynamics = Dynamics::stochastic);
};

/// gamma * z, z standard normal.
Vec draw_init(const SamplerConfig& config, int dim, RngStream& rng);

struct SampleOptions {
  /// Indices (0..start index) at which every trajectory's state is kept.
  std::vector<int> checkpoints;
};

struct SampleBatch {
  Mat points;  // n_samples x d
  SamplerConfig config;
  std::uint64_t schedule_fingerprint = 0;
  std::string field_tag;
  int start_index = 0;
  std::map<int, Mat> checkpoint_states;  // index -> n_samples x d
};

/// Runs n_samples independent trajectories. Trajectory t uses
/// RngStream(config.seed, t) for both its initial draw and its step noise, so
/// the batch is bitwise reproducible for any thread count. Throws BatchError
/// naming the lowest failing trajectory.
SampleBatch sample(const ScoreField& field, const NoiseSchedule& schedule,
                   const SamplerConfig& config, const SampleOptions& options = {});

struct GridCell {
  double gamma = 1.0;
  int delta_skip = 0;
  SampleBatch batch;
  std::string error;  // non-empty when the cell failed
};

/// Seed used for cell k of a grid.
std::uint64_t grid_cell_seed(std::uint64_t base_seed, std::size_t cell_index);

/// Cartesian product of gamma and delta values (gamma-major). Each cell runs
/// in boost_skip mode with seed grid_cell_seed(base.seed, k); a failing cell
/// records its error and the remaining cells still run.
std::vector<GridCell> sample_grid(const ScoreField& field, const NoiseSchedule& schedule,
                                  const SamplerConfig& base, const std::vector<double>& gammas,
                                  const std::vector<int>& deltas);

}  // namespace bnslab
