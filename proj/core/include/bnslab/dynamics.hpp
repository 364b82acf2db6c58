#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bnslab/linalg.hpp"
#include "bnslab/rng.hpp"
#include "bnslab/schedule.hpp"
#include "bnslab/score.hpp"

namespace bnslab {

enum class Dynamics { stochastic, ode };

const char* to_string(Dynamics d) noexcept;

/// One-shot perturbation sqrt(ab_i) x0 + sqrt(1 - ab_i) z.
Vec forward_perturb(const Vec& x0, const NoiseSchedule& schedule, int i, RngStream& rng);

/// Discrete reverse step i -> i - 1:
///   (x + beta_i s(x, i)) / sqrt(alpha_i) + sqrt(beta_i) z,
/// with z suppressed at i == 1.
Vec ancestral_step(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x, int i,
                   RngStream& rng);

/// Explicit Euler step of the probability-flow ODE, x + (beta_i / 2)(x + s(x, i)).
Vec ode_step(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x, int i);

struct PosteriorMean {
  Vec value;
  /// alpha_bar(i) < 1e-12: the division by sqrt(alpha_bar) amplifies any score error.
  bool ill_conditioned = false;
};

/// Tweedie estimate E[x0 | x_i] = (x + (1 - ab_i) s(x, i)) / sqrt(ab_i).
PosteriorMean posterior_mean(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x,
                             int i);

/// Re-noises the posterior mean with a fresh eps, x' = sqrt(ab) x0_hat + sqrt(1 - ab) eps,
/// and returns ||eps_hat(x', i) - eps|| with eps_hat = -sqrt(1 - ab) s(x', i).
/// Always uses the unscaled field, so temperature does not leak into the statistic.
double estimation_error(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x,
                        int i, RngStream& rng);

struct RecordFlags {
  bool states = true;
  bool norms = true;
  bool denoised = false;
  bool errors = false;
};

/// Record of one reverse pass. indices runs start_index, start_index - 1, ..., 0;
/// states/norms (when recorded) are aligned with it. denoised/errors are only
/// defined for i >= 1, so they align with the first indices.size() - 1 entries.
struct Trajectory {
  std::vector<int> indices;
  std::vector<Vec> states;
  std::vector<double> norms;
  std::vector<Vec> denoised;
  std::vector<double> errors;

  int n_steps() const noexcept { return indices.empty() ? 0 : static_cast<int>(indices.size()) - 1; }
  const Vec& final_state() const { return states.back(); }
};

/// Non-finite score or state during integration. Carries the partial record.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, int index, Vec state, Trajectory partial)
      : std::runtime_error(what),
        index_(index),
        state_(std::move(state)),
        partial_(std::move(partial)) {}
  int index() const noexcept { return index_; }
  const Vec& state() const noexcept { return state_; }
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  int index_;
  Vec state_;
  Trajectory partial_;
};

/// Integrates from start_index down to 0. The final state is always stored
/// in `states` even when intermediate states are not recorded. Estimation
/// errors draw from a separate stream derived from `rng`, so recording never
/// changes the path.
Trajectory run_reverse(const ScoreField& field, const NoiseSchedule& schedule, const Vec& start,
                       int start_index, Dynamics dynamics, RngStream& rng,
                       const RecordFlags& record = {});

/// Batched steps over the columns of x (d x n). `noise` supplies the Gaussian
/// draws for the stochastic step (ignored at i == 1). Both return the lowest
/// column whose score or new state is non-finite, or -1.
Eigen::Index ancestral_step_batch(const ScoreField& field, const NoiseSchedule& schedule, int i,
                                  Mat& x, const Mat& noise, Mat& scratch);
Eigen::Index ode_step_batch(const ScoreField& field, const NoiseSchedule& schedule, int i, Mat& x,
                            Mat& scratch);

/// Synchronously coupled reverse chains for a Gaussian data law: the reference
/// chain starts from the exact marginal at n_skip, the boosted chain from
/// N(0, gamma^2 I); both consume the same noise at every step.
struct CoupledCurve {
  std::vector<int> indices;           // n_skip, n_skip - 1, ..., 0
  std::vector<double> mean_sq_error;  // E ||x_i - x_hat_i||^2
  std::vector<double> stderr_sq_error;
  double max_norm = 0.0;  // largest state norm seen in either chain
};

CoupledCurve coupled_error_curve(const GaussianSpec& spec, const NoiseSchedule& schedule,
                                 int n_skip, double gamma, int n_pairs, std::uint64_t seed);

/// Pilot estimate of the state-norm bound: 1.5 x the largest norm seen in
/// `n_pilot` coupled pairs.
double estimate_norm_bound(const GaussianSpec& spec, const NoiseSchedule& schedule, int n_skip,
                           double gamma, int n_pilot, std::uint64_t seed);

}  // namespace bnslab
