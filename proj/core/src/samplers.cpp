#include "bnslab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bnslab/errors.hpp"
#include "bnslab/parallel.hpp"
#include "noise_buffer.hpp"

namespace bnslab {

namespace {

constexpr Eigen::Index kBlock = 256;

}  // namespace

const char* to_string(SamplerMode m) noexcept {
  switch (m) {
    case SamplerMode::standard: return "standard";
    case SamplerMode::boost_skip: return "boost_skip";
    case SamplerMode::temperature: return "temperature";
  }
  return "unknown";
}

SamplerMode parse_sampler_mode(const std::string& text) {
  if (text == "standard") return SamplerMode::standard;
  if (text == "boost_skip" || text == "boost-skip") return SamplerMode::boost_skip;
  if (text == "temperature") return SamplerMode::temperature;
  throw ParameterError("unknown sampler mode '" + text + "'");
}

Dynamics parse_dynamics(const std::string& text) {
  if (text == "stochastic" || text == "sde") return Dynamics::stochastic;
  if (text == "ode") return Dynamics::ode;
  throw ParameterError("unknown dynamics '" + text + "'");
}

void SamplerConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("tau must be > 0");
  if (delta_skip < 0) throw ParameterError("delta_skip must be >= 0");
  if (n_samples < 1) throw ParameterError("n_samples must be >= 1");
  switch (mode) {
    case SamplerMode::standard:
      if (gamma != 1.0 || delta_skip != 0 || tau != 1.0) {
        throw ParameterError("standard mode requires gamma = 1, delta_skip = 0, tau = 1");
      }
      break;
    case SamplerMode::temperature:
      if (gamma != 1.0 || delta_skip != 0) {
        throw ParameterError("temperature mode requires gamma = 1, delta_skip = 0");
      }
      break;
    case SamplerMode::boost_skip:
      if (tau != 1.0) throw ParameterError("boost_skip mode requires tau = 1");
      break;
  }
}

SamplerConfig SamplerConfig::standard(int n_samples, std::uint64_t seed, Dynamics dynamics) {
  SamplerConfig c;
  c.dynamics = dynamics;
  c.n_samples = n_samples;
  c.seed = seed;
  return c;
}

SamplerConfig SamplerConfig::boost_skip(double gamma, int delta_skip, int n_samples,
                                        std::uint64_t seed, Dynamics dynamics) {
  SamplerConfig c = standard(n_samples, seed, dynamics);
  c.mode = SamplerMode::boost_skip;
  c.gamma = gamma;
  c.delta_skip = delta_skip;
  return c;
}

SamplerConfig SamplerConfig::temperature(double tau, int n_samples, std::uint64_t seed,
                                         Dynamics dynamics) {
  SamplerConfig c = standard(n_samples, seed, dynamics);
  c.mode = SamplerMode::temperature;
  c.tau = tau;
  return c;
}

Vec draw_init(const SamplerConfig& config, int dim, RngStream& rng) {
  if (dim < 1) throw ParameterError("dimension must be >= 1");
  Vec z(dim);
  rng.fill_normal({z.data(), static_cast<std::size_t>(dim)});
  return config.gamma * z;
}

SampleBatch sample(const ScoreField& field, const NoiseSchedule& schedule,
                   const SamplerConfig& config, const SampleOptions& options) {
  config.validate();
  const SkipPlan plan = plan_skip(schedule, config.delta_skip);
  const int start = plan.n_skip;
  for (int c : options.checkpoints) {
    if (c < 0 || c > start) {
      throw ParameterError("checkpoint " + std::to_string(c) + " outside [0, " +
                           std::to_string(start) + "]");
    }
  }
  const ScoreField effective = config.tau == 1.0 ? field : field.with_temperature(config.tau);
  const int d = field.dim();
  const Eigen::Index n_total = config.n_samples;

  SampleBatch batch;
  batch.points.resize(n_total, d);
  batch.config = config;
  batch.schedule_fingerprint = schedule.fingerprint();
  batch.field_tag = field.tag();
  batch.start_index = start;
  std::vector<bool> wanted(static_cast<std::size_t>(start) + 1, false);
  for (int c : options.checkpoints) {
    wanted[static_cast<std::size_t>(c)] = true;
    batch.checkpoint_states[c].resize(n_total, d);
  }

  const auto n_blocks = static_cast<std::size_t>((n_total + kBlock - 1) / kBlock);
  parallel_for(n_blocks, [&](std::size_t b) {
    const auto first = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index n = std::min(kBlock, n_total - first);
    std::vector<RngStream> rngs;
    rngs.reserve(static_cast<std::size_t>(n));
    Mat x(d, n), scratch;
    const Mat scratch_noise = Mat::Zero(d, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      RngStream& rng = rngs.emplace_back(config.seed, static_cast<std::uint64_t>(first + c));
      x.col(c) = draw_init(config, d, rng);
    }
    auto snapshot = [&](int i) {
      if (wanted[static_cast<std::size_t>(i)]) {
        batch.checkpoint_states[i].middleRows(first, n) = x.transpose();
      }
    };
    detail::NoiseBuffer noise(d, start - 1, rngs);
    for (int i = start; i >= 1; --i) {
      snapshot(i);
      Eigen::Index bad;
      if (config.dynamics == Dynamics::ode) {
        bad = ode_step_batch(effective, schedule, i, x, scratch);
      } else {
        const Mat& z = i > 1 ? noise.next(start - i) : scratch_noise;
        bad = ancestral_step_batch(effective, schedule, i, x, z, scratch);
      }
      if (bad >= 0) {
        throw BatchError("trajectory " + std::to_string(first + bad) +
                             " became non-finite at step " + std::to_string(i),
                         first + bad, i);
      }
    }
    snapshot(0);
    batch.points.middleRows(first, n) = x.transpose();
  });
  return batch;
}

std::uint64_t grid_cell_seed(std::uint64_t base_seed, std::size_t cell_index) {
  return mix_seed(base_seed, cell_index);
}

std::vector<GridCell> sample_grid(const ScoreField& field, const NoiseSchedule& schedule,
                                  const SamplerConfig& base, const std::vector<double>& gammas,
                                  const std::vector<int>& deltas) {
  if (gammas.empty() || deltas.empty()) throw ParameterError("grid value lists must be non-empty");
  std::vector<GridCell> cells;
  cells.reserve(gammas.size() * deltas.size());
  for (double g : gammas) {
    for (int delta : deltas) {
      GridCell cell;
      cell.gamma = g;
      cell.delta_skip = delta;
      SamplerConfig cfg = SamplerConfig::boost_skip(g, delta, base.n_samples,
                                                    grid_cell_seed(base.seed, cells.size()),
                                                    base.dynamics);
      try {
        cell.batch = sample(field, schedule, cfg);
      } catch (const std::exception& e) {
        cell.batch.config = cfg;
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace bnslab
