#pragma once

#include "bnslab/linalg.hpp"
#include "bnslab/rng.hpp"

namespace bnslab {

/// One-channel H x W noise image and the gamma it was drawn with.
struct NoiseField {
  Mat values;
  double gamma = 1.0;
};

/// gamma * z with z standard normal, filled row by row.
NoiseField draw_noise_field(int height, int width, double gamma, RngStream& rng);

enum class FilterKind { low_pass, high_pass };

/// Radial frequency of DFT bin (u, v): the Euclidean norm of
/// (min(u, H - u), min(v, W - v)).
double radial_frequency(int u, int v, int height, int width);

/// Ideal radial filter. low_pass keeps bins with radius <= cutoff; high_pass
/// removes them, except that cutoff 0 leaves the field uncut.
NoiseField filter_noise(const NoiseField& field, double cutoff, FilterKind kind);

struct BandEnergy {
  double low = 0.0;   // sum over bins with radius <= cutoff of |F|^2 / (H W)
  double high = 0.0;  // remaining bins
  double spatial = 0.0;  // sum of squared values
};

BandEnergy band_energy(const NoiseField& field, double cutoff);

/// Number of DFT bins with radius <= cutoff.
int bins_within(int height, int width, double cutoff);

}  // namespace bnslab
