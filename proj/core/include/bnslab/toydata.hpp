#pragma once

#include <cstdint>
#include <vector>

#include "bnslab/linalg.hpp"
#include "bnslab/mlp.hpp"
#include "bnslab/score.hpp"

namespace bnslab {

/// Two concentric noisy circles with a majority:minority count ratio of
/// `imbalance`. The minority ring is the outer one by default.
struct CirclesSpec {
  double radius_major = 0.5;
  double radius_minor = 1.0;
  double ring_noise_sigma = 0.02;
  double imbalance = 10.0;
  int n_points = 10000;
  std::uint64_t seed = 0;

  /// Radii positive and distinct, sigma < |r_major - r_minor| / 4, imbalance > 0.
  void validate() const;
  double minority_probability() const noexcept { return 1.0 / (1.0 + imbalance); }
};

enum class RingLabel : std::uint8_t { major = 0, minor = 1 };

struct LabeledPoints {
  Mat points;  // n x 2
  std::vector<RingLabel> labels;
};

/// Each point picks the minor ring with probability 1 / (1 + imbalance), a
/// uniform angle, and isotropic Gaussian ring noise.
LabeledPoints sample_circles(const CirclesSpec& spec);

/// Training sampler over the same law (columns are points).
DataSampler circles_data_sampler(const CirclesSpec& spec);

struct CirclesGeometry {
  double radius_major = 0.5;
  double radius_minor = 1.0;
  double ring_noise_sigma = 0.02;
  double eps_manifold = 0.06;

  void validate() const;
  /// eps_manifold = 3 sigma unless given.
  static CirclesGeometry from_spec(const CirclesSpec& spec, double eps_manifold = -1.0);
};

enum class RingSelection { both, major_only, minor_only };

/// Isotropic Gaussians of variance sigma^2 equally spaced on each ring; ring
/// weights in the ratio imbalance : 1 (or all weight on a single ring).
MixtureSpec circles_ring_mixture(const CirclesSpec& spec, int components_per_ring,
                                 RingSelection rings = RingSelection::both);

}  // namespace bnslab
