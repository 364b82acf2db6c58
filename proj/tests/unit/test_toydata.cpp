#include <algorithm>
#include <cmath>
#include <numbers>

#include "bnslab/errors.hpp"
#include "bnslab/toydata.hpp"
#include "doctest.h"

using namespace bnslab;

TEST_CASE("sample_circles is deterministic per seed") {
  CirclesSpec spec;
  spec.n_points = 2000;
  spec.seed = 5;
  const LabeledPoints a = sample_circles(spec);
  const LabeledPoints b = sample_circles(spec);
  CHECK(a.points == b.points);
  CHECK(a.labels == b.labels);
  spec.seed = 6;
  CHECK_FALSE(sample_circles(spec).points == a.points);
  CHECK(a.points.rows() == 2000);
  CHECK(a.points.cols() == 2);
}

TEST_CASE("minority fraction matches 1 / (1 + imbalance)") {
  CirclesSpec spec;
  spec.n_points = 110000;
  spec.seed = 17;
  const LabeledPoints pts = sample_circles(spec);
  const auto n_minor = std::count(pts.labels.begin(), pts.labels.end(), RingLabel::minor);
  const double p = 1.0 / 11.0;
  const double se = std::sqrt(p * (1.0 - p) / spec.n_points);
  CHECK(std::abs(static_cast<double>(n_minor) / spec.n_points - p) < 4.0 * se);

  spec.imbalance = 1.0;
  spec.n_points = 20000;
  const LabeledPoints even = sample_circles(spec);
  const auto n_even = std::count(even.labels.begin(), even.labels.end(), RingLabel::minor);
  CHECK(std::abs(static_cast<double>(n_even) / 20000.0 - 0.5) < 4.0 * std::sqrt(0.25 / 20000.0));
}

TEST_CASE("points sit on their ring as sigma shrinks") {
  CirclesSpec spec;
  spec.ring_noise_sigma = 1e-9;
  spec.n_points = 3000;
  const LabeledPoints pts = sample_circles(spec);
  for (Eigen::Index k = 0; k < pts.points.rows(); ++k) {
    const double want = pts.labels[static_cast<std::size_t>(k)] == RingLabel::minor ? spec.radius_minor
                                                                                    : spec.radius_major;
    CHECK(std::abs(pts.points.row(k).norm() - want) < 1e-8);
  }
}

TEST_CASE("ring noise has the configured spread") {
  CirclesSpec spec;
  spec.n_points = 50000;
  const LabeledPoints pts = sample_circles(spec);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < pts.points.rows(); ++k) {
    const double want = pts.labels[static_cast<std::size_t>(k)] == RingLabel::minor ? spec.radius_minor
                                                                                    : spec.radius_major;
    const double dr = pts.points.row(k).norm() - want;
    sum += dr * dr;
  }
  CHECK(std::sqrt(sum / spec.n_points) == doctest::Approx(spec.ring_noise_sigma).epsilon(0.03));
}

TEST_CASE("training sampler draws columns from the same law") {
  CirclesSpec spec;
  const DataSampler ds = circles_data_sampler(spec);
  CHECK(ds.dim == 2);
  RngStream rng(3, 0);
  const Mat batch = ds.draw(rng, 4000);
  CHECK(batch.rows() == 2);
  CHECK(batch.cols() == 4000);
  int near_ring = 0;
  for (Eigen::Index c = 0; c < batch.cols(); ++c) {
    const double r = batch.col(c).norm();
    if (std::min(std::abs(r - 0.5), std::abs(r - 1.0)) < 0.1) ++near_ring;
  }
  CHECK(near_ring == 4000);
}

TEST_CASE("spec and geometry validation") {
  CirclesSpec bad;
  bad.radius_minor = bad.radius_major;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = CirclesSpec{};
  bad.ring_noise_sigma = 0.2;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = CirclesSpec{};
  bad.imbalance = 0.0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  const CirclesGeometry g = CirclesGeometry::from_spec(CirclesSpec{});
  CHECK(g.eps_manifold == doctest::Approx(0.06));
  CHECK(CirclesGeometry::from_spec(CirclesSpec{}, 0.1).eps_manifold == 0.1);
}

TEST_CASE("ring mixture weights and layout") {
  CirclesSpec spec;
  const MixtureSpec mix = circles_ring_mixture(spec, 32);
  CHECK(mix.components.size() == 64);
  double total = 0.0;
  double minor = 0.0;
  for (std::size_t k = 0; k < mix.weights.size(); ++k) {
    total += mix.weights[k];
    if (std::abs(mix.components[k].mean.norm() - 1.0) < 1e-12) minor += mix.weights[k];
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(minor == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK_NOTHROW(mix.validate());

  const MixtureSpec single = circles_ring_mixture(spec, 16, RingSelection::minor_only);
  CHECK(single.components.size() == 16);
  for (const auto& c : single.components) CHECK(c.mean.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(circles_ring_mixture(spec, 4), ParameterError);
}

TEST_CASE("dense ring mixture has a nearly flat angular density") {
  CirclesSpec spec;
  spec.ring_noise_sigma = 0.05;
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  const MixtureSpec mix = circles_ring_mixture(spec, 64, RingSelection::minor_only);
  double lo = 1e300;
  double hi = -1e300;
  for (int k = 0; k < 720; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 720.0;
    const Vec x = (Vec(2) << std::cos(th), std::sin(th)).finished();
    const double p = std::exp(mixture_log_density(mix, s, 0, x));
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  CHECK((hi - lo) / hi < 0.05);
}
