#include <cmath>

#include "bnslab/errors.hpp"
#include "bnslab/schedule.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bnslab;

TEST_CASE("linear schedule endpoints and length") {
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  CHECK(s.n_steps() == 1000);
  CHECK(s.beta(1) == 1e-4);
  CHECK(s.beta(1000) == 0.02);
  CHECK(s.alpha_bar(0) == 1.0);
  CHECK(s.alpha_bars().size() == 1001);
  CHECK(s.alpha(17) == 1.0 - s.beta(17));
}

TEST_CASE("alpha_bar_N matches an independent cumulative product") {
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  CHECK(s.alpha_bar(1000) == doctest::Approx(oracle::kAlphaBarN).epsilon(1e-12));
  CHECK(alpha_continuous(s, 1000) == doctest::Approx(std::sqrt(oracle::kAlphaBarN)).epsilon(1e-12));
}

TEST_CASE("alpha_bar is strictly decreasing for positive betas") {
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  for (int i = 1; i <= 1000; ++i) REQUIRE(s.alpha_bar(i) < s.alpha_bar(i - 1));
}

TEST_CASE("zero beta gives a flat alpha_bar step") {
  const auto s = NoiseSchedule::from_betas({0.1, 0.0, 0.2});
  CHECK(s.alpha_bar(2) == s.alpha_bar(1));
  CHECK(s.alpha(2) == 1.0);
  CHECK_THROWS_AS(NoiseSchedule::from_betas({0.1, 1.0}), ParameterError);
  CHECK_THROWS_AS(NoiseSchedule::from_betas({}), ParameterError);
}

TEST_CASE("invalid linear parameters are rejected") {
  CHECK_THROWS_AS(build_linear_schedule(1, 1e-4, 0.02), ParameterError);
  CHECK_THROWS_AS(build_linear_schedule(10, 0.0, 0.02), ParameterError);
  CHECK_THROWS_AS(build_linear_schedule(10, 0.03, 0.02), ParameterError);
  CHECK_THROWS_AS(build_linear_schedule(10, 1e-4, 1.0), ParameterError);
}

TEST_CASE("index ranges are enforced") {
  const auto s = build_linear_schedule(10, 1e-4, 0.02);
  CHECK_THROWS_AS(s.beta(0), ParameterError);
  CHECK_THROWS_AS(s.beta(11), ParameterError);
  CHECK_THROWS_AS(s.alpha_bar(-1), ParameterError);
  CHECK_NOTHROW(s.alpha_bar(0));
}

TEST_CASE("alpha_at_time agrees on the grid and is monotone between") {
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  for (int i : {0, 1, 250, 999, 1000}) {
    CHECK(alpha_at_time(s, s.time_of(i)) == doctest::Approx(alpha_continuous(s, i)).epsilon(1e-14));
  }
  double prev = 2.0;
  for (int k = 0; k <= 4000; ++k) {
    const double a = alpha_at_time(s, k / 4000.0);
    REQUIRE(a < prev);
    prev = a;
  }
  CHECK_THROWS_AS(alpha_at_time(s, 1.5), ParameterError);
}

TEST_CASE("plan_skip and the recipe threshold") {
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  const SkipPlan p = plan_skip(s, 700);
  CHECK(p.n_skip == 300);
  CHECK(p.alpha_at_skip == alpha_continuous(s, 300));
  CHECK_FALSE(p.below_recipe_threshold);
  CHECK(plan_skip(s, 0).below_recipe_threshold);
  CHECK_THROWS_AS(plan_skip(s, 1000), ParameterError);
  CHECK_THROWS_AS(plan_skip(s, -1), ParameterError);

  const int delta = recipe_delta_skip(s);
  CHECK(alpha_continuous(s, 1000 - delta) > 0.01);
  CHECK(alpha_continuous(s, 1000 - delta + 1) <= 0.01);
}

TEST_CASE("delta_for_alpha picks the nearest grid alpha") {
  const auto s = build_linear_schedule(1000, 1e-4, 0.02);
  const int delta = delta_for_alpha(s, 0.5);
  const double a = alpha_continuous(s, 1000 - delta);
  CHECK(std::abs(a - 0.5) <= std::abs(alpha_continuous(s, 1000 - delta - 1) - 0.5));
  CHECK(std::abs(a - 0.5) <= std::abs(alpha_continuous(s, 1000 - delta + 1) - 0.5));
}

TEST_CASE("fingerprint is stable and sensitive") {
  const auto a = build_linear_schedule(1000, 1e-4, 0.02);
  const auto b = build_linear_schedule(1000, 1e-4, 0.02);
  const auto c = build_linear_schedule(1000, 1e-4, 0.021);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
}
