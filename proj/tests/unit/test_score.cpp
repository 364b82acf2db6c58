#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "bnslab/errors.hpp"
#include "bnslab/score.hpp"
#include "bnslab/toydata.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bnslab;

namespace {

NoiseSchedule default_schedule() { return build_linear_schedule(1000, 1e-4, 0.02); }

// Schedule whose single step has alpha_bar(1) = a^2.
NoiseSchedule one_step(double a) { return NoiseSchedule::from_betas({1.0 - a * a}); }

GaussianSpec random_spec(std::mt19937_64& gen, int d) {
  std::normal_distribution<double> n;
  Mat a(d, d);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = n(gen);
  GaussianSpec g{Vec(d), a * a.transpose() + 0.1 * Mat::Identity(d, d)};
  for (int k = 0; k < d; ++k) g.mean[k] = n(gen);
  return g;
}

bool bitwise_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

double relative_gap(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(b.norm(), 1e-3); }

}  // namespace

TEST_CASE("gaussian_marginal: endpoints and the Sigma0 = 4I example") {
  const auto s = default_schedule();
  GaussianSpec g{Vec::Constant(2, 1.5), 4.0 * Mat::Identity(2, 2)};
  const auto m0 = gaussian_marginal(g, s, 0);
  CHECK((m0.mean - g.mean).norm() == 0.0);
  CHECK((m0.cov - g.cov).norm() == 0.0);
  const auto mN = gaussian_marginal(g, s, 1000);
  CHECK(mN.mean.cwiseAbs().maxCoeff() < 1e-2);
  CHECK((mN.cov - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-2);
  const auto half = gaussian_marginal(g, one_step(0.5), 1);
  CHECK(half.cov(0, 0) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(half.cov(1, 1) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(half.cov(0, 1) == 0.0);
}

TEST_CASE("gaussian_score worked values") {
  const auto s = default_schedule();
  SUBCASE("scalar sigma0^2 = 4 at alpha = 0.5") {
    GaussianSpec g{Vec::Zero(1), 4.0 * Mat::Identity(1, 1)};
    const Vec score = gaussian_score(g, one_step(0.5), 1, Vec::Ones(1));
    CHECK(score[0] == doctest::Approx(-1.0 / 1.75).epsilon(1e-14));
  }
  SUBCASE("standard normal gives -x at every index") {
    const GaussianSpec g = GaussianSpec::isotropic(3, 1.0);
    Vec x(3);
    x << 0.3, -1.2, 2.5;
    for (int i : {0, 1, 500, 1000}) CHECK((gaussian_score(g, s, i, x) + x).norm() < 1e-14);
  }
  SUBCASE("zero at the diffused mean") {
    GaussianSpec g{Vec::Constant(2, 0.7), 2.0 * Mat::Identity(2, 2)};
    const Vec mu_t = gaussian_marginal(g, s, 300).mean;
    CHECK(gaussian_score(g, s, 300, mu_t).norm() < 1e-15);
  }
}

TEST_CASE("gaussian_score matches the finite-difference gradient of the log density") {
  const auto s = default_schedule();
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> pick_i(0, 1000);
  std::uniform_int_distribution<int> pick_d(1, 3);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    const int d = pick_d(gen);
    const GaussianSpec g = random_spec(gen, d);
    const int i = pick_i(gen);
    const auto [m, c] = oracle::diffused(g.mean, g.cov, s.alpha_bar(i));
    Vec x = m;
    for (int k = 0; k < d; ++k) x[k] += 1.5 * n(gen);
    auto logp = [&](const Vec& y) { return oracle::log_normal_density(m, c, y); };
    const Vec fd = oracle::fd_gradient(logp, x, 1e-5);
    worst = std::max(worst, relative_gap(gaussian_score(g, s, i, x), fd));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("mixture_score matches the finite-difference gradient of the log density") {
  const auto s = default_schedule();
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> pick_i(1, 1000);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    MixtureSpec mix;
    std::vector<Vec> means;
    std::vector<Mat> covs;
    const int k_count = 2 + probe % 4;
    double total = 0.0;
    for (int k = 0; k < k_count; ++k) {
      mix.components.push_back(random_spec(gen, 2));
      mix.weights.push_back(0.5 + std::abs(n(gen)));
      total += mix.weights.back();
    }
    for (double& w : mix.weights) w /= total;
    for (const auto& c : mix.components) {
      means.push_back(c.mean);
      covs.push_back(c.cov);
    }
    const int i = pick_i(gen);
    Vec x(2);
    x << 2.0 * n(gen), 2.0 * n(gen);
    auto logp = [&](const Vec& y) {
      return oracle::log_mixture_density(mix.weights, means, covs, s.alpha_bar(i), y);
    };
    const Vec fd = oracle::fd_gradient(logp, x, 1e-5);
    worst = std::max(worst, relative_gap(mixture_score(mix, s, i, x), fd));
    CHECK(mixture_log_density(mix, s, i, x) == doctest::Approx(logp(x)).epsilon(1e-10));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("8-component ring: score at the ring centre, mid index") {
  const auto s = default_schedule();
  MixtureSpec mix;
  std::vector<Vec> means;
  std::vector<Mat> covs;
  for (int k = 0; k < 8; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 8.0;
    GaussianSpec g{Vec(2), 0.05 * Mat::Identity(2, 2)};
    g.mean << std::cos(th), std::sin(th);
    mix.components.push_back(g);
    mix.weights.push_back(k == 0 ? 0.3 : 0.1);  // asymmetric so the score is non-zero
    means.push_back(g.mean);
    covs.push_back(g.cov);
  }
  const Vec x = Vec::Zero(2);
  auto logp = [&](const Vec& y) {
    return oracle::log_mixture_density(mix.weights, means, covs, s.alpha_bar(500), y);
  };
  const Vec fd = oracle::fd_gradient(logp, x, 1e-5);
  CHECK(fd.norm() > 1e-3);
  CHECK(relative_gap(mixture_score(mix, s, 500, x), fd) < 1e-4);
}

TEST_CASE("one-component mixture equals gaussian_score bit for bit") {
  const auto s = default_schedule();
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n;
  for (int probe = 0; probe < 50; ++probe) {
    const GaussianSpec g = random_spec(gen, 3);
    const MixtureSpec mix{{1.0}, {g}};
    Vec x(3);
    x << n(gen), n(gen), n(gen);
    const int i = 20 * probe;
    REQUIRE(bitwise_equal(mixture_score(mix, s, i, x), gaussian_score(g, s, i, x)));
  }
}

TEST_CASE("symmetric pair: no score component along the axis on the symmetry plane") {
  const auto s = default_schedule();
  GaussianSpec a{Vec(2), 0.2 * Mat::Identity(2, 2)};
  GaussianSpec b = a;
  a.mean << -1.0, 0.0;
  b.mean << 1.0, 0.0;
  const MixtureSpec mix{{0.5, 0.5}, {a, b}};
  for (double y : {-2.0, 0.0, 0.3, 5.0}) {
    Vec x(2);
    x << 0.0, y;
    CHECK(std::abs(mixture_score(mix, s, 400, x)[0]) < 1e-15);
  }
}

TEST_CASE("mixture_score stays finite when every responsibility underflows") {
  GaussianSpec a{Vec(1), 1e-6 * Mat::Identity(1, 1)};
  GaussianSpec b = a;
  a.mean << -1.0;
  b.mean << 1.0;
  const MixtureSpec mix{{0.5, 0.5}, {a, b}};
  const auto s = NoiseSchedule::from_betas({1e-12});
  Vec x(1);
  x << 1e160;
  const Vec out = mixture_score(mix, s, 0, x);
  CHECK(std::isfinite(out[0]));
  CHECK(out[0] < 0.0);
}

TEST_CASE("spec validation") {
  GaussianSpec bad{Vec::Zero(2), Mat::Identity(2, 2)};
  bad.cov(0, 1) = 0.5;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  GaussianSpec neg{Vec::Zero(1), -Mat::Identity(1, 1)};
  CHECK_THROWS_AS(neg.validate(), ParameterError);
  GaussianSpec shape{Vec::Zero(2), Mat::Identity(3, 3)};
  CHECK_THROWS_AS(shape.validate(), ParameterError);
  MixtureSpec weights{{0.5, 0.6}, {GaussianSpec::isotropic(1, 1.0), GaussianSpec::isotropic(1, 1.0)}};
  CHECK_THROWS_AS(weights.validate(), ParameterError);
  MixtureSpec dims{{0.5, 0.5}, {GaussianSpec::isotropic(1, 1.0), GaussianSpec::isotropic(2, 1.0)}};
  CHECK_THROWS_AS(dims.validate(), ParameterError);
}

TEST_CASE("ScoreField wrappers") {
  const auto s = default_schedule();
  GaussianSpec g{Vec::Zero(2), 4.0 * Mat::Identity(2, 2)};
  const ScoreField f = ScoreField::gaussian(g);
  CHECK(f.tag() == "gaussian-oracle");
  CHECK(f.dim() == 2);
  CHECK(f.kind() == ScoreField::Kind::gaussian_oracle);
  CHECK(f.gaussian_spec() != nullptr);
  CHECK(f.mixture_spec() == nullptr);
  CHECK(f.net() == nullptr);

  Vec x(2);
  x << 0.4, -0.9;
  const Vec base = f.score(s, 200, x);
  CHECK(bitwise_equal(base, gaussian_score(g, s, 200, x)));
  const ScoreField hot = f.with_temperature(2.0);
  CHECK((hot.score(s, 200, x) - base / 2.0).norm() < 1e-15);
  CHECK(bitwise_equal(hot.unscaled().score(s, 200, x), base));
  CHECK_THROWS_AS(f.with_temperature(0.0), ParameterError);
  CHECK_THROWS_AS(f.score(s, 200, Vec::Zero(3)), ParameterError);

  Mat pts(2, 5);
  pts.setRandom();
  Mat out;
  f.score_batch(s, 200, pts, out);
  for (int c = 0; c < 5; ++c) CHECK((out.col(c) - f.score(s, 200, pts.col(c))).norm() < 1e-14);

  const ScoreField m = ScoreField::mixture(circles_ring_mixture(CirclesSpec{}, 16));
  CHECK(m.tag() == "mixture-oracle");
  CHECK(m.mixture_spec() != nullptr);
  const ScoreField n = ScoreField::network(MlpScoreNet::initialize(2, {8}, 1));
  CHECK(n.tag() == "trained-net");
  CHECK(n.net() != nullptr);
  CHECK_THROWS_AS(n.score(s, 0, Vec::Zero(2)), ParameterError);
}
