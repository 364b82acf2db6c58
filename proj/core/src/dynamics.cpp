#include "bnslab/dynamics.hpp"

#include <cmath>
#include <string>

#include "bnslab/errors.hpp"
#include "bnslab/parallel.hpp"
#include "noise_buffer.hpp"

namespace bnslab {

namespace {

constexpr std::uint64_t kRecordStreamTag = 0x7265636f7264ULL;
constexpr Eigen::Index kBlock = 256;

void check_step_index(const NoiseSchedule& schedule, int i) {
  if (i < 1 || i > schedule.n_steps()) {
    throw ParameterError("step index " + std::to_string(i) + " outside [1, " +
                         std::to_string(schedule.n_steps()) + "]");
  }
}

Vec checked_score(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x, int i) {
  Vec s = field.score(schedule, i, x);
  if (!s.allFinite()) {
    throw IntegrationError("non-finite score at index " + std::to_string(i), i, x, {});
  }
  return s;
}

Eigen::Index first_bad_column(const Mat& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (!m.col(c).allFinite()) return c;
  }
  return -1;
}

}  // namespace

const char* to_string(Dynamics d) noexcept {
  return d == Dynamics::ode ? "ode" : "stochastic";
}

Vec forward_perturb(const Vec& x0, const NoiseSchedule& schedule, int i, RngStream& rng) {
  const double ab = schedule.alpha_bar(i);
  Vec z(x0.size());
  rng.fill_normal({z.data(), static_cast<std::size_t>(z.size())});
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * z;
}

Vec ancestral_step(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x, int i,
                   RngStream& rng) {
  check_step_index(schedule, i);
  const Vec s = checked_score(field, schedule, x, i);
  const double beta = schedule.beta(i);
  Vec next = (x + beta * s) / std::sqrt(schedule.alpha(i));
  if (i > 1) {
    Vec z(x.size());
    rng.fill_normal({z.data(), static_cast<std::size_t>(z.size())});
    next += std::sqrt(beta) * z;
  }
  return next;
}

Vec ode_step(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x, int i) {
  check_step_index(schedule, i);
  const Vec s = checked_score(field, schedule, x, i);
  return x + 0.5 * schedule.beta(i) * (x + s);
}

PosteriorMean posterior_mean(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x,
                             int i) {
  check_step_index(schedule, i);
  const double ab = schedule.alpha_bar(i);
  const Vec s = field.score(schedule, i, x);
  return {(x + (1.0 - ab) * s) / std::sqrt(ab), ab < 1e-12};
}

double estimation_error(const ScoreField& field, const NoiseSchedule& schedule, const Vec& x,
                        int i, RngStream& rng) {
  check_step_index(schedule, i);
  const ScoreField base = field.unscaled();
  const double ab = schedule.alpha_bar(i);
  const Vec x0_hat = posterior_mean(base, schedule, x, i).value;
  Vec eps(x.size());
  rng.fill_normal({eps.data(), static_cast<std::size_t>(eps.size())});
  const Vec renoised = std::sqrt(ab) * x0_hat + std::sqrt(1.0 - ab) * eps;
  const Vec eps_hat = -std::sqrt(1.0 - ab) * base.score(schedule, i, renoised);
  return (eps_hat - eps).norm();
}

Trajectory run_reverse(const ScoreField& field, const NoiseSchedule& schedule, const Vec& start,
                       int start_index, Dynamics dynamics, RngStream& rng,
                       const RecordFlags& record) {
  check_step_index(schedule, start_index);
  if (start.size() != field.dim()) throw ParameterError("start state has the wrong dimension");
  RngStream record_rng(rng.seed(), rng.stream() ^ kRecordStreamTag);
  Trajectory traj;
  traj.indices.reserve(static_cast<std::size_t>(start_index) + 1);

  auto keep = [&](int i, const Vec& x) {
    traj.indices.push_back(i);
    if (record.states) traj.states.push_back(x);
    if (record.norms) traj.norms.push_back(x.norm());
  };

  Vec x = start;
  for (int i = start_index; i >= 1; --i) {
    keep(i, x);
    try {
      if (record.denoised) traj.denoised.push_back(posterior_mean(field, schedule, x, i).value);
      if (record.errors) traj.errors.push_back(estimation_error(field, schedule, x, i, record_rng));
      x = dynamics == Dynamics::ode ? ode_step(field, schedule, x, i)
                                    : ancestral_step(field, schedule, x, i, rng);
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.what(), i, x, std::move(traj));
    }
    if (!x.allFinite()) {
      throw IntegrationError("non-finite state after step at index " + std::to_string(i), i, x,
                             std::move(traj));
    }
  }
  traj.indices.push_back(0);
  if (record.norms) traj.norms.push_back(x.norm());
  traj.states.push_back(std::move(x));
  return traj;
}

Eigen::Index ancestral_step_batch(const ScoreField& field, const NoiseSchedule& schedule, int i,
                                  Mat& x, const Mat& noise, Mat& scratch) {
  check_step_index(schedule, i);
  field.score_batch(schedule, i, x, scratch);
  const Eigen::Index bad = first_bad_column(scratch);
  if (bad >= 0) return bad;
  const double beta = schedule.beta(i);
  x = (x + beta * scratch) / std::sqrt(schedule.alpha(i));
  if (i > 1) x += std::sqrt(beta) * noise;
  return first_bad_column(x);
}

Eigen::Index ode_step_batch(const ScoreField& field, const NoiseSchedule& schedule, int i, Mat& x,
                            Mat& scratch) {
  check_step_index(schedule, i);
  field.score_batch(schedule, i, x, scratch);
  const Eigen::Index bad = first_bad_column(scratch);
  if (bad >= 0) return bad;
  x += 0.5 * schedule.beta(i) * (x + scratch);
  return first_bad_column(x);
}

CoupledCurve coupled_error_curve(const GaussianSpec& spec, const NoiseSchedule& schedule,
                                 int n_skip, double gamma, int n_pairs, std::uint64_t seed) {
  spec.validate();
  check_step_index(schedule, n_skip);
  if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
  if (n_pairs < 2) throw ParameterError("n_pairs must be >= 2");

  const ScoreField field = ScoreField::gaussian(spec);
  const int d = spec.dim();
  const Mat chol = Eigen::LLT<Mat>(spec.cov).matrixL();
  const double ab = schedule.alpha_bar(n_skip);
  const auto n_levels = static_cast<std::size_t>(n_skip) + 1;
  const auto n_blocks = static_cast<std::size_t>((n_pairs + kBlock - 1) / kBlock);

  struct Partial {
    std::vector<double> sum;
    std::vector<double> sum_sq;
    double max_norm = 0.0;
  };
  std::vector<Partial> partials(n_blocks);

  parallel_for(n_blocks, [&](std::size_t b) {
    const auto first = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index n = std::min<Eigen::Index>(kBlock, n_pairs - first);
    std::vector<RngStream> rngs;
    rngs.reserve(static_cast<std::size_t>(n));
    Mat ref(d, n), boosted(d, n), scratch;
    Vec z(d);
    for (Eigen::Index c = 0; c < n; ++c) {
      RngStream& rng = rngs.emplace_back(seed, static_cast<std::uint64_t>(first + c));
      rng.fill_normal({z.data(), static_cast<std::size_t>(d)});
      const Vec x0 = spec.mean + chol * z;
      rng.fill_normal({z.data(), static_cast<std::size_t>(d)});
      ref.col(c) = std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * z;
      rng.fill_normal({z.data(), static_cast<std::size_t>(d)});
      boosted.col(c) = gamma * z;
    }
    Partial& p = partials[b];
    p.sum.assign(n_levels, 0.0);
    p.sum_sq.assign(n_levels, 0.0);
    auto tally = [&](std::size_t level) {
      for (Eigen::Index c = 0; c < n; ++c) {
        const double e = (ref.col(c) - boosted.col(c)).squaredNorm();
        p.sum[level] += e;
        p.sum_sq[level] += e * e;
        p.max_norm = std::max({p.max_norm, ref.col(c).norm(), boosted.col(c).norm()});
      }
    };
    tally(0);
    detail::NoiseBuffer buffer(d, n_skip - 1, rngs);
    const Mat no_noise = Mat::Zero(d, n);
    for (int i = n_skip; i >= 1; --i) {
      const Mat& noise = i > 1 ? buffer.next(n_skip - i) : no_noise;
      const Eigen::Index bad_ref = ancestral_step_batch(field, schedule, i, ref, noise, scratch);
      const Eigen::Index bad_boost =
          ancestral_step_batch(field, schedule, i, boosted, noise, scratch);
      if (bad_ref >= 0 || bad_boost >= 0) {
        const Eigen::Index c = bad_ref >= 0 ? bad_ref : bad_boost;
        throw BatchError("non-finite state in coupled chains", first + c, i);
      }
      tally(static_cast<std::size_t>(n_skip - i + 1));
    }
  });

  CoupledCurve curve;
  curve.indices.resize(n_levels);
  curve.mean_sq_error.assign(n_levels, 0.0);
  curve.stderr_sq_error.assign(n_levels, 0.0);
  std::vector<double> sum(n_levels, 0.0), sum_sq(n_levels, 0.0);
  for (const Partial& p : partials) {
    for (std::size_t l = 0; l < n_levels; ++l) {
      sum[l] += p.sum[l];
      sum_sq[l] += p.sum_sq[l];
    }
    curve.max_norm = std::max(curve.max_norm, p.max_norm);
  }
  const auto n = static_cast<double>(n_pairs);
  for (std::size_t l = 0; l < n_levels; ++l) {
    curve.indices[l] = n_skip - static_cast<int>(l);
    const double mean = sum[l] / n;
    const double var = std::max(0.0, (sum_sq[l] - n * mean * mean) / (n - 1.0));
    curve.mean_sq_error[l] = mean;
    curve.stderr_sq_error[l] = std::sqrt(var / n);
  }
  return curve;
}

double estimate_norm_bound(const GaussianSpec& spec, const NoiseSchedule& schedule, int n_skip,
                           double gamma, int n_pilot, std::uint64_t seed) {
  return 1.5 * coupled_error_curve(spec, schedule, n_skip, gamma, n_pilot, seed).max_norm;
}

}  // namespace bnslab
