#include "bnslab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bnslab/errors.hpp"
#include "bnslab/parallel.hpp"

namespace bnslab {

namespace {

constexpr double kLrdFloor = 1e-12;

struct Neighbours {
  std::vector<int> index;  // k per query, nearest first
  std::vector<double> dist;
  int k = 0;
};

// Brute force; ties broken by reference row.
Neighbours knn(const Mat& queries, const Mat& reference, int k, bool exclude_self) {
  if (queries.cols() != reference.cols()) throw ParameterError("point sets differ in dimension");
  const Eigen::Index m = reference.rows();
  const Eigen::Index usable = exclude_self ? m - 1 : m;
  if (k < 1) throw ParameterError("k must be >= 1");
  if (k > usable || k >= m) {
    throw ParameterError("k must be smaller than the reference size");
  }
  const Eigen::Index n = queries.rows();
  Neighbours nb;
  nb.k = k;
  nb.index.resize(static_cast<std::size_t>(n * k));
  nb.dist.resize(static_cast<std::size_t>(n * k));
  const Mat ref_t = reference.transpose();
  constexpr Eigen::Index kChunk = 256;
  const auto n_chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  parallel_for(n_chunks, [&](std::size_t chunk) {
    std::vector<std::pair<double, int>> cand(static_cast<std::size_t>(m));
    const auto begin = static_cast<Eigen::Index>(chunk) * kChunk;
    const Eigen::Index end = std::min(n, begin + kChunk);
    for (Eigen::Index q = begin; q < end; ++q) {
      const Vec x = queries.row(q).transpose();
      std::size_t used = 0;
      for (Eigen::Index r = 0; r < m; ++r) {
        if (exclude_self && r == q) continue;
        cand[used++] = {(ref_t.col(r) - x).squaredNorm(), static_cast<int>(r)};
      }
      std::partial_sort(cand.begin(), cand.begin() + k, cand.begin() + static_cast<long>(used));
      for (int j = 0; j < k; ++j) {
        const auto slot = static_cast<std::size_t>(q * k + j);
        nb.index[slot] = cand[static_cast<std::size_t>(j)].second;
        nb.dist[slot] = std::sqrt(cand[static_cast<std::size_t>(j)].first);
      }
    }
  });
  return nb;
}

DensityStats avg_knn_impl(const Mat& batch, const Mat& reference, int k, bool self) {
  const Neighbours nb = knn(batch, reference, k, self);
  std::vector<double> values(static_cast<std::size_t>(batch.rows()));
  for (std::size_t q = 0; q < values.size(); ++q) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += nb.dist[q * static_cast<std::size_t>(k) + static_cast<std::size_t>(j)];
    values[q] = s / k;
  }
  return summarize(std::move(values));
}

std::vector<double> local_reachability(const Neighbours& nb, const std::vector<double>& kdist,
                                       std::size_t n) {
  const auto k = static_cast<std::size_t>(nb.k);
  std::vector<double> lrd(n);
  for (std::size_t q = 0; q < n; ++q) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t o = static_cast<std::size_t>(nb.index[q * k + j]);
      s += std::max(kdist[o], nb.dist[q * k + j]);
    }
    lrd[q] = 1.0 / std::max(s / static_cast<double>(k), kLrdFloor);
  }
  return lrd;
}

DensityStats lof_impl(const Mat& batch, const Mat& reference, int k, bool self) {
  const auto m = static_cast<std::size_t>(reference.rows());
  const auto kk = static_cast<std::size_t>(k);
  const Neighbours ref_nb = knn(reference, reference, k, true);
  std::vector<double> kdist(m);
  for (std::size_t r = 0; r < m; ++r) kdist[r] = ref_nb.dist[r * kk + kk - 1];
  const std::vector<double> ref_lrd = local_reachability(ref_nb, kdist, m);

  const Neighbours q_nb = self ? ref_nb : knn(batch, reference, k, false);
  const auto n = static_cast<std::size_t>(batch.rows());
  const std::vector<double> q_lrd = self ? ref_lrd : local_reachability(q_nb, kdist, n);
  std::vector<double> values(n);
  for (std::size_t q = 0; q < n; ++q) {
    double s = 0.0;
    for (std::size_t j = 0; j < kk; ++j) s += ref_lrd[static_cast<std::size_t>(q_nb.index[q * kk + j])];
    values[q] = s / static_cast<double>(k) / q_lrd[q];
  }
  return summarize(std::move(values));
}

}  // namespace

EmpiricalMoments empirical_moments(const Mat& points) {
  const Eigen::Index n = points.rows();
  if (n < 2) throw ParameterError("empirical moments need at least 2 points");
  EmpiricalMoments m;
  m.n = n;
  m.mean = points.colwise().mean().transpose();
  const Mat centered = points.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / static_cast<double>(n - 1);
  const auto nd = static_cast<double>(n);
  m.mean_stderr = (m.cov.diagonal() / nd).cwiseSqrt();
  m.variance_stderr.resize(points.cols());
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const double m4 = centered.col(c).array().pow(4).mean();
    const double s2 = m.cov(c, c);
    const double var = (m4 - (nd - 3.0) / (nd - 1.0) * s2 * s2) / nd;
    m.variance_stderr[c] = std::sqrt(std::max(var, 0.0));
  }
  return m;
}

EmpiricalMoments empirical_moments(const SampleBatch& batch) {
  return empirical_moments(batch.points);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

DensityStats summarize(std::vector<double> values) {
  DensityStats s;
  if (!values.empty()) {
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.p50 = quantile(values, 0.5);
    s.p90 = quantile(values, 0.9);
  }
  s.values = std::move(values);
  return s;
}

DensityStats avg_knn(const Mat& batch, const Mat& reference, int k) {
  return avg_knn_impl(batch, reference, k, false);
}

DensityStats avg_knn_self(const Mat& points, int k) { return avg_knn_impl(points, points, k, true); }

DensityStats lof(const Mat& batch, const Mat& reference, int k) {
  return lof_impl(batch, reference, k, false);
}

DensityStats lof_self(const Mat& points, int k) { return lof_impl(points, points, k, true); }

CirclesReport circles_report(const Mat& points, const CirclesGeometry& geometry) {
  geometry.validate();
  if (points.cols() != 2) throw ParameterError("circles_report needs 2D points");
  Eigen::Index minor = 0;
  Eigen::Index major = 0;
  const Eigen::Index n = points.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double r = points.row(k).norm();
    const double d_major = std::abs(r - geometry.radius_major);
    const double d_minor = std::abs(r - geometry.radius_minor);
    if (d_minor < d_major) {
      if (d_minor <= geometry.eps_manifold) ++minor;
    } else if (d_major <= geometry.eps_manifold) {
      ++major;
    }
  }
  CirclesReport rep;
  rep.n = n;
  if (n > 0) {
    const auto nd = static_cast<double>(n);
    rep.minority_fraction = static_cast<double>(minor) / nd;
    rep.majority_fraction = static_cast<double>(major) / nd;
    rep.off_manifold_fraction = static_cast<double>(n - minor - major) / nd;
  }
  return rep;
}

HistogramTv histogram_tv(const Mat& a, const Mat& b, int bins_per_axis, const Vec& lo,
                         const Vec& hi) {
  if (bins_per_axis < 1) throw ParameterError("bins_per_axis must be >= 1");
  if (a.rows() == 0 || b.rows() == 0) throw ParameterError("histogram batches must be non-empty");
  const Eigen::Index d = a.cols();
  if (b.cols() != d || lo.size() != d || hi.size() != d) {
    throw ParameterError("histogram inputs differ in dimension");
  }
  if (!((hi - lo).array() > 0.0).all()) throw ParameterError("histogram bounds must be increasing");
  const double cells = std::pow(static_cast<double>(bins_per_axis), static_cast<double>(d));
  if (cells > 5e7) throw ParameterError("too many histogram cells");
  const auto n_cells = static_cast<std::size_t>(cells);

  auto fill = [&](const Mat& pts, std::vector<double>& h) {
    h.assign(n_cells + 1, 0.0);
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      std::size_t cell = 0;
      bool inside = true;
      for (Eigen::Index c = 0; c < d && inside; ++c) {
        const double u = (pts(r, c) - lo[c]) / (hi[c] - lo[c]);
        if (!(u >= 0.0 && u <= 1.0)) {
          inside = false;
          break;
        }
        const auto bin = std::min(static_cast<std::size_t>(u * bins_per_axis),
                                  static_cast<std::size_t>(bins_per_axis - 1));
        cell = cell * static_cast<std::size_t>(bins_per_axis) + bin;
      }
      h[inside ? cell : n_cells] += 1.0;
    }
    for (double& v : h) v /= static_cast<double>(pts.rows());
    return 1.0 - h[n_cells];
  };
  std::vector<double> ha, hb;
  HistogramTv out;
  out.coverage_a = fill(a, ha);
  out.coverage_b = fill(b, hb);
  out.coverage_warning = out.coverage_a < 0.99 || out.coverage_b < 0.99;
  double l1 = 0.0;
  for (std::size_t c = 0; c <= n_cells; ++c) l1 += std::abs(ha[c] - hb[c]);
  out.tv = 0.5 * l1;
  return out;
}

}  // namespace bnslab
