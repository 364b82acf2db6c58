#pragma once

#include <vector>

#include "bnslab/linalg.hpp"
#include "bnslab/samplers.hpp"
#include "bnslab/toydata.hpp"

namespace bnslab {

struct EmpiricalMoments {
  Vec mean;
  Mat cov;              // unbiased
  Vec mean_stderr;      // sqrt(var_k / n)
  Vec variance_stderr;  // delta-method standard error of each diagonal entry
  Eigen::Index n = 0;
};

/// Rows of `points` are samples. Requires n >= 2.
EmpiricalMoments empirical_moments(const Mat& points);
EmpiricalMoments empirical_moments(const SampleBatch& batch);

struct DensityStats {
  std::vector<double> values;
  double mean = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
};

/// Linear-interpolation quantile of a sample (the usual "type 7" estimator).
double quantile(std::vector<double> values, double q);
DensityStats summarize(std::vector<double> values);

/// Mean distance to the k nearest reference points. Ties are broken by
/// reference index, and exactly k neighbours are used.
DensityStats avg_knn(const Mat& batch, const Mat& reference, int k = 5);
/// Same with batch == reference; each point's own row is excluded.
DensityStats avg_knn_self(const Mat& points, int k = 5);

/// Local outlier factor of each batch point relative to the reference set.
/// Local reachability densities use 1 / max(mean reach distance, 1e-12), so
/// fully coincident neighbourhoods give LOF 1.
DensityStats lof(const Mat& batch, const Mat& reference, int k = 20);
DensityStats lof_self(const Mat& points, int k = 20);

struct CirclesReport {
  double minority_fraction = 0.0;
  double majority_fraction = 0.0;
  double off_manifold_fraction = 0.0;
  Eigen::Index n = 0;
};

/// Each point goes to the ring with the smaller radial distance when that
/// distance is <= eps_manifold, else it is off-manifold.
CirclesReport circles_report(const Mat& points, const CirclesGeometry& geometry);

struct HistogramTv {
  double tv = 0.0;
  /// Fewer than 99% of either batch fell inside the bounds.
  bool coverage_warning = false;
  double coverage_a = 1.0;
  double coverage_b = 1.0;
};

/// Half the L1 distance between normalised histograms on a regular grid of
/// bins_per_axis^d cells over [lo, hi]; points outside share one overflow bin.
HistogramTv histogram_tv(const Mat& a, const Mat& b, int bins_per_axis, const Vec& lo,
                         const Vec& hi);

}  // namespace bnslab
