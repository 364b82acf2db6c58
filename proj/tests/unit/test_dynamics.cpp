#include <cmath>
#include <limits>
#include <random>

#include "bnslab/dynamics.hpp"
#include "bnslab/errors.hpp"
#include "bnslab/metrics.hpp"
#include "bnslab/samplers.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bnslab;

namespace {

NoiseSchedule default_schedule() { return build_linear_schedule(1000, 1e-4, 0.02); }

ScoreField standard_normal_field(int d) { return ScoreField::gaussian(GaussianSpec::isotropic(d, 1.0)); }

}  // namespace

TEST_CASE("forward_perturb: no-noise limit and moments") {
  RngStream rng(1, 0);
  Vec x0(2);
  x0 << 1.0, -1.0;
  CHECK(forward_perturb(x0, NoiseSchedule::from_betas({0.0}), 1, rng) == x0);

  const auto s = default_schedule();
  const int n = 100000;
  for (int i : {1000, 400}) {
    Mat draws(n, 2);
    RngStream r(7, static_cast<std::uint64_t>(i));
    for (int k = 0; k < n; ++k) draws.row(k) = forward_perturb(x0, s, i, r).transpose();
    const EmpiricalMoments m = empirical_moments(draws);
    const double a = std::sqrt(s.alpha_bar(i));
    for (int c = 0; c < 2; ++c) {
      CHECK(std::abs(m.mean[c] - a * x0[c]) < 3.0 * m.mean_stderr[c]);
      if (i == 1000) {
        CHECK(std::abs(m.mean[c]) < 0.02);
        CHECK(std::abs(m.cov(c, c) - 1.0) < 0.02);
      }
    }
  }
}

TEST_CASE("ancestral_step algebra") {
  RngStream rng(2, 0);
  Vec x(2);
  x << 0.7, -1.3;
  SUBCASE("beta = 0 leaves the state unchanged") {
    const auto s = NoiseSchedule::from_betas({0.0, 0.0});
    const ScoreField f = ScoreField::gaussian(GaussianSpec::isotropic(2, 3.0));
    CHECK(ancestral_step(f, s, x, 2, rng) == x);
  }
  SUBCASE("standard normal oracle: deterministic part is sqrt(alpha) x") {
    const auto s = NoiseSchedule::from_betas({0.3});
    const Vec next = ancestral_step(standard_normal_field(2), s, x, 1, rng);
    CHECK((next - std::sqrt(0.7) * x).norm() < 1e-15);
  }
  SUBCASE("noise is drawn from the stream for i > 1") {
    const auto s = default_schedule();
    RngStream a(5, 3);
    RngStream b(5, 3);
    const ScoreField f = standard_normal_field(2);
    const Vec next = ancestral_step(f, s, x, 400, a);
    Vec z(2);
    z << b.normal(), b.normal();
    const Vec expect = (x + s.beta(400) * (-x)) / std::sqrt(s.alpha(400)) + std::sqrt(s.beta(400)) * z;
    CHECK((next - expect).norm() < 1e-14);
  }
  CHECK_THROWS_AS(ancestral_step(standard_normal_field(2), default_schedule(), x, 0, rng),
                  ParameterError);
}

TEST_CASE("ode_step: stationary for the standard normal and identity at beta = 0") {
  Vec x(3);
  x << 0.1, 2.0, -4.0;
  CHECK((ode_step(standard_normal_field(3), default_schedule(), x, 700) - x).norm() < 1e-15);
  const auto s = NoiseSchedule::from_betas({0.0});
  CHECK(ode_step(ScoreField::gaussian(GaussianSpec::isotropic(3, 5.0)), s, x, 1) == x);
}

TEST_CASE("posterior_mean agrees with exact Gaussian conditioning") {
  const auto s = default_schedule();
  Mat a(2, 2);
  a << 1.2, 0.3, -0.4, 0.8;
  GaussianSpec g{Vec(2), a * a.transpose() + 0.2 * Mat::Identity(2, 2)};
  g.mean << 0.5, -1.5;
  const ScoreField f = ScoreField::gaussian(g);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n;
  for (int i : {1, 10, 100, 400, 800, 1000}) {
    Vec x(2);
    x << n(gen), n(gen);
    const PosteriorMean pm = posterior_mean(f, s, x, i);
    CHECK((pm.value - oracle::conditional_mean(g.mean, g.cov, s.alpha_bar(i), x)).norm() < 1e-10);
    CHECK_FALSE(pm.ill_conditioned);
  }
  SUBCASE("unit-variance data") {
    Vec x(2);
    x << 1.0, 2.0;
    const Vec got = posterior_mean(standard_normal_field(2), s, x, 300).value;
    CHECK((got - std::sqrt(s.alpha_bar(300)) * x).norm() < 1e-14);
  }
  SUBCASE("alpha_bar = 1 returns the input") {
    Vec x(2);
    x << 1.0, 2.0;
    CHECK(posterior_mean(f, NoiseSchedule::from_betas({0.0}), x, 1).value == x);
  }
  SUBCASE("tiny alpha_bar is flagged") {
    const auto steep = NoiseSchedule::from_betas(std::vector<double>(40, 0.6));
    CHECK(posterior_mean(f, steep, Vec::Zero(2), 40).ill_conditioned);
  }
}

TEST_CASE("estimation_error is reproducible and ignores temperature") {
  const auto s = default_schedule();
  const ScoreField f = ScoreField::gaussian(GaussianSpec::isotropic(2, 4.0));
  Vec x(2);
  x << 0.3, 0.4;
  RngStream a(9, 1);
  RngStream b(9, 1);
  RngStream c(9, 1);
  const double e1 = estimation_error(f, s, x, 250, a);
  CHECK(e1 == estimation_error(f, s, x, 250, b));
  CHECK(e1 == estimation_error(f.with_temperature(1.7), s, x, 250, c));
  CHECK(e1 >= 0.0);
  CHECK(std::isfinite(e1));
}

TEST_CASE("estimation_error with the exact oracle is stable across indices") {
  const auto s = default_schedule();
  const GaussianSpec g = GaussianSpec::isotropic(2, 4.0);
  const ScoreField f = ScoreField::gaussian(g);
  RngStream rng(4, 0);
  for (int i : {5, 100, 500, 995}) {
    double total = 0.0;
    for (int k = 0; k < 2000; ++k) {
      Vec x0(2);
      x0 << 2.0 * rng.normal(), 2.0 * rng.normal();
      const Vec x = forward_perturb(x0, s, i, rng);
      total += estimation_error(f, s, x, i, rng);
    }
    const double mean = total / 2000.0;
    CHECK(std::isfinite(mean));
    CHECK(mean < 2.0);
  }
}

TEST_CASE("run_reverse records") {
  const auto s = default_schedule();
  const ScoreField f = ScoreField::gaussian(GaussianSpec::isotropic(2, 4.0));
  Vec start(2);
  start << 1.0, -1.0;
  SUBCASE("start index 1 is a single step") {
    RngStream rng(1, 1);
    const Trajectory t = run_reverse(f, s, start, 1, Dynamics::stochastic, rng);
    CHECK(t.n_steps() == 1);
    CHECK(t.indices == std::vector<int>{1, 0});
    CHECK(t.states.size() == 2);
  }
  SUBCASE("all flags") {
    RngStream rng(1, 2);
    const Trajectory t = run_reverse(f, s, start, 50, Dynamics::stochastic, rng,
                                     {true, true, true, true});
    CHECK(t.indices.size() == 51);
    CHECK(t.indices.front() == 50);
    CHECK(t.indices.back() == 0);
    CHECK(t.norms.size() == 51);
    CHECK(t.denoised.size() == 50);
    CHECK(t.errors.size() == 50);
    for (std::size_t k = 1; k < t.indices.size(); ++k) CHECK(t.indices[k] < t.indices[k - 1]);
    for (std::size_t k = 0; k < t.norms.size(); ++k) CHECK(t.norms[k] == t.states[k].norm());
  }
  SUBCASE("recording does not perturb the path") {
    RngStream a(3, 0);
    RngStream b(3, 0);
    const Trajectory plain = run_reverse(f, s, start, 300, Dynamics::stochastic, a, {false, false, false, false});
    const Trajectory rich = run_reverse(f, s, start, 300, Dynamics::stochastic, b, {true, true, true, true});
    CHECK(plain.states.size() == 1);
    CHECK(plain.final_state() == rich.final_state());
  }
  SUBCASE("identical streams reproduce identical paths") {
    RngStream a(8, 8);
    RngStream b(8, 8);
    CHECK(run_reverse(f, s, start, 1000, Dynamics::stochastic, a).states ==
          run_reverse(f, s, start, 1000, Dynamics::stochastic, b).states);
  }
  SUBCASE("ode with the standard-normal oracle keeps the start") {
    RngStream rng(0, 0);
    const Trajectory t = run_reverse(standard_normal_field(2), s, start, 1000, Dynamics::ode, rng);
    CHECK((t.final_state() - start).norm() < 1e-12);
  }
  SUBCASE("a non-finite state aborts with the partial record") {
    RngStream rng(0, 0);
    Vec bad = start;
    bad[0] = std::numeric_limits<double>::infinity();
    try {
      run_reverse(f, s, bad, 20, Dynamics::stochastic, rng);
      FAIL("expected IntegrationError");
    } catch (const IntegrationError& e) {
      CHECK(e.index() == 20);
      CHECK(e.partial().indices.size() == 1);
    }
  }
}

TEST_CASE("batched steps match the single-trajectory steps") {
  const auto s = default_schedule();
  const ScoreField f = ScoreField::gaussian(GaussianSpec::isotropic(2, 2.5));
  Mat x = Mat::Random(2, 6);
  Mat noise = Mat::Random(2, 6);
  Mat scratch;
  Mat y = x;
  CHECK(ancestral_step_batch(f, s, 321, y, noise, scratch) == -1);
  Mat o = x;
  CHECK(ode_step_batch(f, s, 321, o, scratch) == -1);
  for (int c = 0; c < 6; ++c) {
    const Vec sc = f.score(s, 321, x.col(c));
    const Vec expect = (x.col(c) + s.beta(321) * sc) / std::sqrt(s.alpha(321)) +
                       std::sqrt(s.beta(321)) * noise.col(c);
    CHECK((y.col(c) - expect).norm() < 1e-14);
    CHECK((o.col(c) - ode_step(f, s, x.col(c), 321)).norm() < 1e-14);
  }
  x(1, 4) = std::numeric_limits<double>::quiet_NaN();
  CHECK(ancestral_step_batch(f, s, 321, x, noise, scratch) == 4);
}

TEST_CASE("stationarity: both dynamics preserve the standard normal law") {
  const auto s = default_schedule();
  const ScoreField f = standard_normal_field(1);
  for (Dynamics dyn : {Dynamics::stochastic, Dynamics::ode}) {
    const SampleBatch b = sample(f, s, SamplerConfig::standard(100000, 17, dyn));
    const EmpiricalMoments m = empirical_moments(b);
    CHECK(std::abs(m.mean[0]) < 3.0 * m.mean_stderr[0]);
    CHECK(std::abs(m.cov(0, 0) - 1.0) < 3.0 * m.variance_stderr[0]);
  }
}

TEST_CASE("marginal consistency at intermediate checkpoints") {
  const auto s = default_schedule();
  const GaussianSpec g{Vec::Constant(1, 0.5), 4.0 * Mat::Identity(1, 1)};
  const SampleBatch b = sample(ScoreField::gaussian(g), s, SamplerConfig::standard(100000, 23),
                               {{500, 250, 0}});
  for (int i : {500, 250, 0}) {
    const GaussianMoments truth = gaussian_marginal(g, s, i);
    const EmpiricalMoments m = empirical_moments(b.checkpoint_states.at(i));
    CHECK(std::abs(m.mean[0] - truth.mean[0]) < 3.0 * m.mean_stderr[0]);
    CHECK(std::abs(m.cov(0, 0) - truth.cov(0, 0)) < 3.0 * m.variance_stderr[0]);
  }
  const EmpiricalMoments final_m = empirical_moments(b);
  CHECK(std::abs(final_m.cov(0, 0) - 4.0) < 0.03 * 4.0);
}

TEST_CASE("coupled chains: shape, determinism and decay") {
  const auto s = default_schedule();
  // Data variance below 1: every step of the exact-score chain contracts the gap.
  const GaussianSpec g = GaussianSpec::isotropic(1, 0.5);
  const CoupledCurve a = coupled_error_curve(g, s, 300, 3.0, 2000, 5);
  const CoupledCurve b = coupled_error_curve(g, s, 300, 3.0, 2000, 5);
  CHECK(a.indices.size() == 301);
  CHECK(a.indices.front() == 300);
  CHECK(a.indices.back() == 0);
  CHECK(a.mean_sq_error == b.mean_sq_error);
  CHECK(a.mean_sq_error.back() < 0.25 * a.mean_sq_error.front());
  CHECK(a.max_norm > 0.0);
  CHECK(estimate_norm_bound(g, s, 300, 3.0, 2000, 5) == 1.5 * a.max_norm);
  CHECK_THROWS_AS(coupled_error_curve(g, s, 0, 3.0, 100, 1), ParameterError);
}
