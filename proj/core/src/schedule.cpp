#include "bnslab/schedule.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "bnslab/errors.hpp"

namespace bnslab {

namespace {

void check_index(const NoiseSchedule& s, int i, int lo) {
  if (i < lo || i > s.n_steps()) {
    throw ParameterError("index " + std::to_string(i) + " outside [" + std::to_string(lo) +
                         ", " + std::to_string(s.n_steps()) + "]");
  }
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::vector<double> betas, double horizon)
    : betas_(std::move(betas)), horizon_(horizon) {
  alphas_.reserve(betas_.size());
  alpha_bars_.reserve(betas_.size() + 1);
  alpha_bars_.push_back(1.0);
  for (double b : betas_) {
    alphas_.push_back(1.0 - b);
    alpha_bars_.push_back(alpha_bars_.back() * alphas_.back());
  }
}

NoiseSchedule NoiseSchedule::linear(int n_steps, double beta_min, double beta_max,
                                    double horizon) {
  if (n_steps < 2) throw ParameterError("n_steps must be >= 2, got " + std::to_string(n_steps));
  if (!(beta_min > 0.0)) throw ParameterError("beta_min must be > 0");
  if (!(beta_max < 1.0)) throw ParameterError("beta_max must be < 1");
  if (!(beta_min <= beta_max)) throw ParameterError("beta_min must be <= beta_max");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");
  std::vector<double> betas(static_cast<std::size_t>(n_steps));
  const double step = (beta_max - beta_min) / static_cast<double>(n_steps - 1);
  for (int k = 0; k < n_steps; ++k) betas[static_cast<std::size_t>(k)] = beta_min + step * k;
  betas.back() = beta_max;
  return NoiseSchedule(std::move(betas), horizon);
}

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas, double horizon) {
  if (betas.empty()) throw ParameterError("beta sequence is empty");
  if (!(horizon > 0.0)) throw ParameterError("horizon must be > 0");
  for (double b : betas) {
    if (!(b >= 0.0 && b < 1.0)) throw ParameterError("beta outside [0, 1): " + std::to_string(b));
  }
  return NoiseSchedule(std::move(betas), horizon);
}

double NoiseSchedule::beta(int i) const {
  check_index(*this, i, 1);
  return betas_[static_cast<std::size_t>(i - 1)];
}

double NoiseSchedule::alpha(int i) const {
  check_index(*this, i, 1);
  return alphas_[static_cast<std::size_t>(i - 1)];
}

double NoiseSchedule::alpha_bar(int i) const {
  check_index(*this, i, 0);
  return alpha_bars_[static_cast<std::size_t>(i)];
}

double NoiseSchedule::time_of(int i) const {
  check_index(*this, i, 0);
  return horizon_ * static_cast<double>(i) / static_cast<double>(n_steps());
}

std::uint64_t NoiseSchedule::fingerprint() const noexcept {
  // FNV-1a over the raw bits.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (double b : betas_) mix(b);
  mix(horizon_);
  return h;
}

NoiseSchedule build_linear_schedule(int n_steps, double beta_min, double beta_max) {
  return NoiseSchedule::linear(n_steps, beta_min, beta_max);
}

double alpha_continuous(const NoiseSchedule& schedule, int i) {
  return std::sqrt(schedule.alpha_bar(i));
}

double alpha_at_time(const NoiseSchedule& schedule, double t) {
  const double T = schedule.horizon();
  if (!(t >= 0.0 && t <= T)) throw ParameterError("time outside [0, T]");
  const double pos = t / T * schedule.n_steps();
  const int lo = std::min(static_cast<int>(std::floor(pos)), schedule.n_steps());
  if (lo == schedule.n_steps() || pos == lo) return alpha_continuous(schedule, lo);
  const double frac = pos - lo;
  const double log_lo = std::log(schedule.alpha_bar(lo));
  const double log_hi = std::log(schedule.alpha_bar(lo + 1));
  return std::exp(0.5 * ((1.0 - frac) * log_lo + frac * log_hi));
}

SkipPlan plan_skip(const NoiseSchedule& schedule, int delta_skip, double threshold) {
  if (delta_skip < 0 || delta_skip >= schedule.n_steps()) {
    throw ParameterError("delta_skip must lie in [0, " + std::to_string(schedule.n_steps() - 1) +
                         "], got " + std::to_string(delta_skip));
  }
  SkipPlan plan;
  plan.delta_skip = delta_skip;
  plan.n_skip = schedule.n_steps() - delta_skip;
  plan.alpha_at_skip = alpha_continuous(schedule, plan.n_skip);
  plan.below_recipe_threshold = plan.alpha_at_skip <= threshold;
  return plan;
}

int recipe_delta_skip(const NoiseSchedule& schedule, double threshold) {
  for (int delta = 0; delta < schedule.n_steps(); ++delta) {
    if (alpha_continuous(schedule, schedule.n_steps() - delta) > threshold) return delta;
  }
  throw ParameterError("no skip reaches alpha > threshold");
}

int delta_for_alpha(const NoiseSchedule& schedule, double target_alpha) {
  int best = 0;
  double best_gap = std::abs(alpha_continuous(schedule, schedule.n_steps()) - target_alpha);
  for (int delta = 1; delta < schedule.n_steps(); ++delta) {
    const double gap =
        std::abs(alpha_continuous(schedule, schedule.n_steps() - delta) - target_alpha);
    if (gap < best_gap) {
      best_gap = gap;
      best = delta;
    }
  }
  return best;
}

}  // namespace bnslab
