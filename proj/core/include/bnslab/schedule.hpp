#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bnslab {

/// Discrete variance-preserving noise schedule.
///
/// Indices follow the DDPM convention: beta(i) and alpha(i) are defined for
/// 1 <= i <= N, alpha_bar(i) for 0 <= i <= N with alpha_bar(0) == 1. The
/// continuous horizon T is mapped linearly onto the grid, t_i = i * T / N.
/// Immutable after construction.
class NoiseSchedule {
 public:
  /// Betas interpolate linearly from beta_min to beta_max (both inclusive).
  static NoiseSchedule linear(int n_steps, double beta_min, double beta_max,
                              double horizon = 1.0);

  /// Arbitrary beta sequence in [0, 1). Zero entries are accepted so that
  /// degenerate steps can be exercised; alpha_bar is then non-increasing.
  static NoiseSchedule from_betas(std::vector<double> betas, double horizon = 1.0);

  int n_steps() const noexcept { return static_cast<int>(betas_.size()); }
  double horizon() const noexcept { return horizon_; }

  double beta(int i) const;
  double alpha(int i) const;
  double alpha_bar(int i) const;

  std::span<const double> betas() const noexcept { return betas_; }
  std::span<const double> alphas() const noexcept { return alphas_; }
  /// alpha_bar(0..N), N + 1 entries.
  std::span<const double> alpha_bars() const noexcept { return alpha_bars_; }

  double time_of(int i) const;

  /// Stable 64-bit digest of (betas, horizon), used as provenance in outputs.
  std::uint64_t fingerprint() const noexcept;

 private:
  NoiseSchedule(std::vector<double> betas, double horizon);

  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  double horizon_;
};

NoiseSchedule build_linear_schedule(int n_steps, double beta_min, double beta_max);

/// The VP-SDE signal scale alpha(t) at grid index i: sqrt(alpha_bar(i)).
double alpha_continuous(const NoiseSchedule& schedule, int i);

/// alpha(t) off the grid: log alpha_bar interpolated linearly between grid
/// points, so it agrees with alpha_continuous on grid times and stays strictly
/// monotone in between.
double alpha_at_time(const NoiseSchedule& schedule, double t);

struct SkipPlan {
  int delta_skip = 0;
  int n_skip = 0;
  double alpha_at_skip = 1.0;
  /// alpha_at_skip <= the recipe threshold; advisory only.
  bool below_recipe_threshold = false;
};

inline constexpr double kSkipRecipeThreshold = 0.01;

SkipPlan plan_skip(const NoiseSchedule& schedule, int delta_skip,
                   double threshold = kSkipRecipeThreshold);

/// Smallest delta_skip whose start alpha exceeds `threshold`.
int recipe_delta_skip(const NoiseSchedule& schedule, double threshold = kSkipRecipeThreshold);

/// delta_skip whose start alpha is closest to `target_alpha`.
int delta_for_alpha(const NoiseSchedule& schedule, double target_alpha);

}  // namespace bnslab
