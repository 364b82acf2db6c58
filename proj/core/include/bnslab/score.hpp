#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bnslab/linalg.hpp"
#include "bnslab/mlp.hpp"
#include "bnslab/schedule.hpp"

namespace bnslab {

/// Clean-data Gaussian N(mean, cov).
struct GaussianSpec {
  Vec mean;
  Mat cov;

  int dim() const noexcept { return static_cast<int>(mean.size()); }
  /// Throws ParameterError unless cov is square, matches mean, is symmetric
  /// and strictly positive definite.
  void validate() const;
  static GaussianSpec isotropic(int dim, double variance, double mean_value = 0.0);
};

/// Finite Gaussian mixture; weights are positive and sum to one.
struct MixtureSpec {
  std::vector<double> weights;
  std::vector<GaussianSpec> components;

  int dim() const;
  void validate() const;
};

struct GaussianMoments {
  Vec mean;
  Mat cov;
};

/// Law of x_i when x_0 ~ spec: N(a mu0, I + a^2 (Sigma0 - I)), a = sqrt(alpha_bar(i)).
GaussianMoments gaussian_marginal(const GaussianSpec& spec, const NoiseSchedule& schedule, int i);

Vec gaussian_score(const GaussianSpec& spec, const NoiseSchedule& schedule, int i, const Vec& x);
double gaussian_log_density(const GaussianSpec& spec, const NoiseSchedule& schedule, int i,
                            const Vec& x);

/// Exact mixture score via responsibilities. When every component
/// underflows, falls back to the score of the component with the smallest
/// Mahalanobis distance.
Vec mixture_score(const MixtureSpec& spec, const NoiseSchedule& schedule, int i, const Vec& x);
double mixture_log_density(const MixtureSpec& spec, const NoiseSchedule& schedule, int i,
                           const Vec& x);

/// A score function s(x, i) backed by an exact oracle or a trained network,
/// optionally multiplied by a constant factor (1 / tau for temperature sampling).
/// Cheap to copy; the underlying oracle or network is shared and immutable.
class ScoreField {
 public:
  enum class Kind { gaussian_oracle, mixture_oracle, trained_net };

  static ScoreField gaussian(GaussianSpec spec);
  static ScoreField mixture(MixtureSpec spec);
  static ScoreField network(MlpScoreNet net);

  Kind kind() const noexcept;
  /// "gaussian-oracle", "mixture-oracle" or "trained-net".
  std::string tag() const;
  int dim() const noexcept;
  double scale() const noexcept { return scale_; }

  /// Same field divided by tau, s(x, i) / tau. Requires tau > 0.
  ScoreField with_temperature(double tau) const;
  /// Same field with the scale reset to 1.
  ScoreField unscaled() const;

  Vec score(const NoiseSchedule& schedule, int i, const Vec& x) const;
  /// Columns of `points` (d x n) are evaluated independently; `out` is resized.
  void score_batch(const NoiseSchedule& schedule, int i, const Mat& points, Mat& out) const;

  const GaussianSpec* gaussian_spec() const noexcept;
  const MixtureSpec* mixture_spec() const noexcept;
  const MlpScoreNet* net() const noexcept;

  struct Impl;

 private:
  explicit ScoreField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
  double scale_ = 1.0;
};

}  // namespace bnslab
