#pragma once

#include <optional>

#include "bnslab/linalg.hpp"
#include "bnslab/schedule.hpp"
#include "bnslab/score.hpp"

namespace bnslab {

enum class Regime { sde, ode };

struct MomentPrediction {
  Vec mean;
  Mat cov;
  Regime regime = Regime::sde;
};

/// Generated law at t = 0 of the reverse SDE started at the skip point from
/// N(init_mean, init_cov), for Gaussian data. With a = skip.alpha_at_skip,
/// mu_T = a mu0 and Sigma_T = I + a^2 (Sigma0 - I):
///   mean = mu0 + a Sigma0 Sigma_T^-1 (init_mean - mu_T)
///   cov  = Sigma0 + a^2 Sigma0^2 Sigma_T^-2 (init_cov - Sigma_T)
MomentPrediction predict_bns_sde(const GaussianSpec& spec, const SkipPlan& skip,
                                 const Vec& init_mean, const Mat& init_cov);

/// Same for the probability-flow ODE:
///   mean = mu0 + Sigma0^1/2 Sigma_T^-1/2 (init_mean - mu_T)
///   cov  = Sigma0 Sigma_T^-1 init_cov
MomentPrediction predict_bns_ode(const GaussianSpec& spec, const SkipPlan& skip,
                                 const Vec& init_mean, const Mat& init_cov);

/// Where, in terms of the skip signal level a = alpha(T_skip), boosting with
/// gamma inflates the generated variance of scalar data with variance sigma0^2.
enum class RegionCase { empty, upper_interval, lower_interval, all };

const char* to_string(RegionCase c) noexcept;

struct AmplificationRegion {
  RegionCase region = RegionCase::empty;
  /// sqrt((gamma^2 - 1) / (sigma0^2 - 1)); absent when sigma0 == 1.
  std::optional<double> kappa;
  /// Grid index realising the a = kappa boundary: for upper_interval the
  /// smallest index with a < kappa (0 when kappa > 1), for lower_interval the
  /// largest index with a > kappa.
  std::optional<int> boundary_index;

  /// Whether skipping to grid index n_skip (n_skip = N - delta_skip) amplifies.
  bool contains(int n_skip) const;
};

/// Case analysis (s = sigma0^2, g = gamma^2):
///   g <= 1 <= s            -> empty
///   s > 1, g > 1           -> upper_interval: a < kappa, i.e. index >= boundary
///   s < 1, g < 1           -> lower_interval: a > kappa, i.e. index <= boundary
///   s <= 1 <= g, (s,g) != (1,1) -> all
/// s == g == 1 is empty (nothing changes).
AmplificationRegion amplification_region(double sigma0, double gamma,
                                         const NoiseSchedule& schedule);

/// max_{j = i+1..n_skip} sqrt(alpha_j) (1 - ab_{j-1}) / (1 - ab_j).
double contraction_rate(const NoiseSchedule& schedule, int i, int n_skip);

struct ContractionReport {
  double lambda = 0.0;
  double c = 0.0;  // d (1 - ab_{n_skip})
  double b = 0.0;
  double gamma = 0.0;
  int dim = 0;
  double floor_term = 0.0;  // 2C / (1 - lambda^2)
  double decay_term = 0.0;  // lambda^{2 (n_skip - i)} (B^2 + gamma^2 d)
  double bound = 0.0;
};

ContractionReport contraction_bound(const NoiseSchedule& schedule, int i, int n_skip,
                                    double gamma, double b, int dim);

/// 1 - 2 Q(B / (2 sqrt(alpha(t_max)^-2 - alpha(t_min)^-2)))
///       * exp(-B L1 / t_min - L1^2 alpha(t_max)^-2 / t_min^2),
/// Q the standard normal upper tail. alpha(t) is evaluated off-grid by
/// alpha_at_time.
double tv_contraction_factor(double b, double l1, double t_min, double t_max,
                             const NoiseSchedule& schedule);

/// log(1 - factor), computed without forming the factor. On the default
/// schedule the damping is often far below machine epsilon, so the factor
/// itself rounds to exactly 1 while this stays finite and negative.
double tv_contraction_log_deficit(double b, double l1, double t_min, double t_max,
                                  const NoiseSchedule& schedule);

/// Standard normal upper tail, erfc(r / sqrt 2) / 2.
double normal_upper_tail(double r);

/// log Q(r), accurate deep into the tail where Q underflows.
double log_normal_upper_tail(double r);

/// Gaussian p_i tempered as p_i^(1/tau) and renormalised: (mu_i, tau Sigma_i).
GaussianMoments tempered_target_moments(const GaussianSpec& spec, const NoiseSchedule& schedule,
                                        double tau, int i);

}  // namespace bnslab
