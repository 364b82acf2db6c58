#include "bnslab/toydata.hpp"

#include <cmath>
#include <numbers>

#include "bnslab/errors.hpp"
#include "bnslab/rng.hpp"

namespace bnslab {

namespace {

// One point: label draw, angle, two noise draws, in that order.
RingLabel draw_point(const CirclesSpec& spec, RngStream& rng, double& x, double& y) {
  const bool minor = rng.uniform() < spec.minority_probability();
  const double r = minor ? spec.radius_minor : spec.radius_major;
  const double theta = 2.0 * std::numbers::pi * rng.uniform();
  x = r * std::cos(theta) + spec.ring_noise_sigma * rng.normal();
  y = r * std::sin(theta) + spec.ring_noise_sigma * rng.normal();
  return minor ? RingLabel::minor : RingLabel::major;
}

}  // namespace

void CirclesSpec::validate() const {
  if (!(radius_major > 0.0) || !(radius_minor > 0.0)) throw ParameterError("radii must be > 0");
  if (radius_major == radius_minor) throw ParameterError("radii must differ");
  if (!(ring_noise_sigma > 0.0)) throw ParameterError("ring_noise_sigma must be > 0");
  if (!(ring_noise_sigma < std::abs(radius_major - radius_minor) / 4.0)) {
    throw ParameterError("ring_noise_sigma must be below a quarter of the ring gap");
  }
  if (!(imbalance > 0.0) || !std::isfinite(imbalance)) throw ParameterError("imbalance must be > 0");
  if (n_points < 0) throw ParameterError("n_points must be >= 0");
}

LabeledPoints sample_circles(const CirclesSpec& spec) {
  spec.validate();
  RngStream rng(spec.seed, 0);
  LabeledPoints out;
  out.points.resize(spec.n_points, 2);
  out.labels.reserve(static_cast<std::size_t>(spec.n_points));
  for (int k = 0; k < spec.n_points; ++k) {
    double x = 0.0;
    double y = 0.0;
    out.labels.push_back(draw_point(spec, rng, x, y));
    out.points(k, 0) = x;
    out.points(k, 1) = y;
  }
  return out;
}

DataSampler circles_data_sampler(const CirclesSpec& spec) {
  spec.validate();
  return {2, [spec](RngStream& rng, int n) {
            Mat m(2, n);
            for (int k = 0; k < n; ++k) draw_point(spec, rng, m(0, k), m(1, k));
            return m;
          }};
}

void CirclesGeometry::validate() const {
  if (!(radius_major > 0.0) || !(radius_minor > 0.0)) throw ParameterError("radii must be > 0");
  if (!(eps_manifold > 0.0)) throw ParameterError("eps_manifold must be > 0");
}

CirclesGeometry CirclesGeometry::from_spec(const CirclesSpec& spec, double eps_manifold) {
  CirclesGeometry g{spec.radius_major, spec.radius_minor, spec.ring_noise_sigma,
                    eps_manifold > 0.0 ? eps_manifold : 3.0 * spec.ring_noise_sigma};
  g.validate();
  return g;
}

MixtureSpec circles_ring_mixture(const CirclesSpec& spec, int components_per_ring,
                                 RingSelection rings) {
  spec.validate();
  if (components_per_ring < 8) throw ParameterError("components_per_ring must be >= 8");
  struct Ring {
    double radius;
    double weight;
  };
  std::vector<Ring> chosen;
  const double p_minor = spec.minority_probability();
  switch (rings) {
    case RingSelection::both:
      chosen = {{spec.radius_major, 1.0 - p_minor}, {spec.radius_minor, p_minor}};
      break;
    case RingSelection::major_only: chosen = {{spec.radius_major, 1.0}}; break;
    case RingSelection::minor_only: chosen = {{spec.radius_minor, 1.0}}; break;
  }
  MixtureSpec mix;
  const double var = spec.ring_noise_sigma * spec.ring_noise_sigma;
  for (const Ring& ring : chosen) {
    for (int k = 0; k < components_per_ring; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / components_per_ring;
      GaussianSpec g{Vec(2), var * Mat::Identity(2, 2)};
      g.mean << ring.radius * std::cos(theta), ring.radius * std::sin(theta);
      mix.components.push_back(std::move(g));
      mix.weights.push_back(ring.weight / components_per_ring);
    }
  }
  return mix;
}

}  // namespace bnslab
