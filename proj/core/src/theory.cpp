#include "bnslab/theory.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bnslab/errors.hpp"

namespace bnslab {

namespace {

struct SkipMoments {
  Vec mu_t;
  Mat sigma_t;
  double a = 0.0;
};

SkipMoments skip_moments(const GaussianSpec& spec, const SkipPlan& skip, const Vec& init_mean,
                         const Mat& init_cov) {
  spec.validate();
  const int d = spec.dim();
  if (init_mean.size() != d || init_cov.rows() != d || init_cov.cols() != d) {
    throw ParameterError("initial moments do not match the data dimension");
  }
  if (!is_symmetric(init_cov, 1e-12 * std::max(1.0, init_cov.cwiseAbs().maxCoeff()))) {
    throw ParameterError("initial covariance is not symmetric");
  }
  const double a = skip.alpha_at_skip;
  if (!(a > 0.0 && a <= 1.0)) throw ParameterError("skip alpha must lie in (0, 1]");
  const Mat eye = Mat::Identity(d, d);
  return {a * spec.mean, eye + a * a * (spec.cov - eye), a};
}

}  // namespace

// Sigma0 and Sigma_T commute, so the reverse map x_T -> x_0 is linear with a
// symmetric gain M; cov = Sigma0 + M (init_cov - Sigma_T) M keeps the result
// symmetric for any init_cov and reduces to the textbook product form when
// init_cov commutes with Sigma0.
MomentPrediction predict_bns_sde(const GaussianSpec& spec, const SkipPlan& skip,
                                 const Vec& init_mean, const Mat& init_cov) {
  const SkipMoments m = skip_moments(spec, skip, init_mean, init_cov);
  const Mat gain = m.a * spec.cov * spd_inverse(m.sigma_t);
  MomentPrediction p;
  p.regime = Regime::sde;
  p.mean = spec.mean + gain * (init_mean - m.mu_t);
  p.cov = spec.cov + gain * (init_cov - m.sigma_t) * gain.transpose();
  p.cov = 0.5 * (p.cov + p.cov.transpose());
  return p;
}

MomentPrediction predict_bns_ode(const GaussianSpec& spec, const SkipPlan& skip,
                                 const Vec& init_mean, const Mat& init_cov) {
  const SkipMoments m = skip_moments(spec, skip, init_mean, init_cov);
  const Mat gain = spd_sqrt(spec.cov) * spd_inv_sqrt(m.sigma_t);
  MomentPrediction p;
  p.regime = Regime::ode;
  p.mean = spec.mean + gain * (init_mean - m.mu_t);
  p.cov = gain * init_cov * gain.transpose();
  p.cov = 0.5 * (p.cov + p.cov.transpose());
  return p;
}

const char* to_string(RegionCase c) noexcept {
  switch (c) {
    case RegionCase::empty: return "empty";
    case RegionCase::upper_interval: return "upper-interval";
    case RegionCase::lower_interval: return "lower-interval";
    case RegionCase::all: return "all";
  }
  return "unknown";
}

bool AmplificationRegion::contains(int n_skip) const {
  switch (region) {
    case RegionCase::empty: return false;
    case RegionCase::all: return true;
    case RegionCase::upper_interval: return boundary_index && n_skip >= *boundary_index;
    case RegionCase::lower_interval: return boundary_index && n_skip <= *boundary_index;
  }
  return false;
}

AmplificationRegion amplification_region(double sigma0, double gamma,
                                         const NoiseSchedule& schedule) {
  if (!(sigma0 > 0.0) || !(gamma > 0.0)) throw ParameterError("sigma0 and gamma must be > 0");
  const double s = sigma0 * sigma0;
  const double g = gamma * gamma;
  AmplificationRegion r;
  if (s != 1.0) {
    const double k2 = (g - 1.0) / (s - 1.0);
    if (k2 >= 0.0) r.kappa = std::sqrt(k2);
  }
  const int N = schedule.n_steps();
  if (s > 1.0 && g > 1.0) {
    r.region = RegionCase::upper_interval;
    for (int i = 0; i <= N; ++i) {
      if (alpha_continuous(schedule, i) < *r.kappa) {
        r.boundary_index = i;
        break;
      }
    }
  } else if (s < 1.0 && g < 1.0) {
    r.region = RegionCase::lower_interval;
    for (int i = N; i >= 0; --i) {
      if (alpha_continuous(schedule, i) > *r.kappa) {
        r.boundary_index = i;
        break;
      }
    }
  } else if (s <= 1.0 && g >= 1.0 && !(s == 1.0 && g == 1.0)) {
    r.region = RegionCase::all;
  } else {
    r.region = RegionCase::empty;
  }
  return r;
}

double contraction_rate(const NoiseSchedule& schedule, int i, int n_skip) {
  if (i < 0 || n_skip > schedule.n_steps() || i >= n_skip) {
    throw ParameterError("contraction range needs 0 <= i < n_skip <= N");
  }
  double lambda = 0.0;
  for (int j = i + 1; j <= n_skip; ++j) {
    const double f = std::sqrt(schedule.alpha(j)) * (1.0 - schedule.alpha_bar(j - 1)) /
                     (1.0 - schedule.alpha_bar(j));
    lambda = std::max(lambda, f);
  }
  return lambda;
}

ContractionReport contraction_bound(const NoiseSchedule& schedule, int i, int n_skip,
                                    double gamma, double b, int dim) {
  if (!(b > 0.0)) throw ParameterError("B must be > 0");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
  if (dim < 1) throw ParameterError("dimension must be >= 1");
  if (i < 0 || n_skip > schedule.n_steps() || i > n_skip || n_skip < 1) {
    throw ParameterError("contraction range needs 0 <= i <= n_skip <= N");
  }
  ContractionReport r;
  // At i == n_skip the range is empty; use the rate of the full segment so the
  // floor term matches the other steps of the same curve.
  r.lambda = contraction_rate(schedule, i == n_skip ? 0 : i, n_skip);
  if (!(r.lambda < 1.0)) throw InternalError("contraction rate is not below 1");
  r.c = dim * (1.0 - schedule.alpha_bar(n_skip));
  r.b = b;
  r.gamma = gamma;
  r.dim = dim;
  r.floor_term = 2.0 * r.c / (1.0 - r.lambda * r.lambda);
  r.decay_term = std::pow(r.lambda, 2.0 * (n_skip - i)) * (b * b + gamma * gamma * dim);
  r.bound = r.floor_term + r.decay_term;
  return r;
}

double normal_upper_tail(double r) { return 0.5 * std::erfc(r / std::numbers::sqrt2); }

double log_normal_upper_tail(double r) {
  if (r < 30.0) return std::log(normal_upper_tail(r));
  // Asymptotic series; the first omitted term is below 1e-9 relative here.
  const double r2 = r * r;
  const double series = 1.0 - 1.0 / r2 + 3.0 / (r2 * r2) - 15.0 / (r2 * r2 * r2);
  return -0.5 * r2 - std::log(r * std::sqrt(2.0 * std::numbers::pi)) + std::log(series);
}

namespace {

struct TvTerms {
  double r = 0.0;
  double log_damping = 0.0;
};

TvTerms tv_terms(double b, double l1, double t_min, double t_max, const NoiseSchedule& schedule) {
  if (!(b > 0.0) || !(l1 > 0.0)) throw ParameterError("B and L1 must be > 0");
  if (!(t_min > 0.0 && t_min < t_max && t_max <= schedule.horizon())) {
    throw ParameterError("times must satisfy 0 < t_min < t_max <= T");
  }
  const double inv_max = std::pow(alpha_at_time(schedule, t_max), -2.0);
  const double inv_min = std::pow(alpha_at_time(schedule, t_min), -2.0);
  if (!(inv_max > inv_min)) throw InternalError("alpha(t) is not decreasing on [t_min, t_max]");
  return {b / (2.0 * std::sqrt(inv_max - inv_min)),
          -b * l1 / t_min - l1 * l1 * inv_max / (t_min * t_min)};
}

}  // namespace

double tv_contraction_factor(double b, double l1, double t_min, double t_max,
                             const NoiseSchedule& schedule) {
  const TvTerms t = tv_terms(b, l1, t_min, t_max, schedule);
  return 1.0 - 2.0 * normal_upper_tail(t.r) * std::exp(t.log_damping);
}

double tv_contraction_log_deficit(double b, double l1, double t_min, double t_max,
                                  const NoiseSchedule& schedule) {
  const TvTerms t = tv_terms(b, l1, t_min, t_max, schedule);
  return std::log(2.0) + log_normal_upper_tail(t.r) + t.log_damping;
}

GaussianMoments tempered_target_moments(const GaussianSpec& spec, const NoiseSchedule& schedule,
                                        double tau, int i) {
  if (!(tau > 0.0)) throw ParameterError("tau must be > 0");
  GaussianMoments m = gaussian_marginal(spec, schedule, i);
  m.cov *= tau;
  return m;
}

}  // namespace bnslab
