#include "bnslab/score.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <variant>

#include "bnslab/errors.hpp"

namespace bnslab {

namespace {

// Eigendecomposition of Sigma0 kept so the diffused covariance at any index
// is Q diag(1 + a^2 (lambda - 1)) Q^T without refactorising.
struct DiffusedComponent {
  Vec mu0;
  Mat q;
  Vec lambda;

  explicit DiffusedComponent(const GaussianSpec& spec) : mu0(spec.mean) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(spec.cov);
    q = solver.eigenvectors();
    lambda = solver.eigenvalues();
  }

  struct At {
    Vec mean;
    Mat precision;
    double log_norm = 0.0;  // -(d log 2 pi + log det cov) / 2
  };

  At at(double alpha_bar) const {
    const double a = std::sqrt(alpha_bar);
    Vec c = (1.0 + alpha_bar * (lambda.array() - 1.0)).matrix();
    c = c.cwiseMax(kEigenFloor);
    At r;
    r.mean = a * mu0;
    r.precision = q * c.cwiseInverse().asDiagonal() * q.transpose();
    r.log_norm = -0.5 * (static_cast<double>(mu0.size()) * std::log(2.0 * std::numbers::pi) +
                         c.array().log().sum());
    return r;
  }
};

struct GaussianOracle {
  GaussianSpec spec;
  DiffusedComponent comp;
};

struct MixtureOracle {
  MixtureSpec spec;
  std::vector<double> log_weights;
  std::vector<DiffusedComponent> comps;
};

void gaussian_batch(const DiffusedComponent& comp, double alpha_bar, const Mat& x, Mat& out) {
  const DiffusedComponent::At at = comp.at(alpha_bar);
  const Mat diff = x.colwise() - at.mean;
  out.noalias() = -(at.precision * diff);
}

void mixture_batch(const std::vector<DiffusedComponent>& comps,
                   const std::vector<double>& log_weights, double alpha_bar, const Mat& x,
                   Mat& out) {
  const auto K = comps.size();
  const Eigen::Index n = x.cols();
  std::vector<Mat> pd(K);
  Mat logterm(static_cast<Eigen::Index>(K), n);
  Mat maha(static_cast<Eigen::Index>(K), n);
  for (std::size_t k = 0; k < K; ++k) {
    const DiffusedComponent::At at = comps[k].at(alpha_bar);
    const Mat diff = x.colwise() - at.mean;
    pd[k].noalias() = at.precision * diff;
    const auto kk = static_cast<Eigen::Index>(k);
    maha.row(kk) = diff.cwiseProduct(pd[k]).colwise().sum();
    logterm.row(kk) = (log_weights[k] + at.log_norm - 0.5 * maha.row(kk).array()).matrix();
  }
  out.resize(x.rows(), n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double top = logterm.col(c).maxCoeff();
    if (!std::isfinite(top)) {
      Eigen::Index best = 0;
      maha.col(c).minCoeff(&best);
      out.col(c) = -pd[static_cast<std::size_t>(best)].col(c);
      continue;
    }
    double total = 0.0;
    Vec r(static_cast<Eigen::Index>(K));
    for (Eigen::Index k = 0; k < r.size(); ++k) {
      r[k] = std::exp(logterm(k, c) - top);
      total += r[k];
    }
    out.col(c) = (r[0] / total) * -pd[0].col(c);
    for (std::size_t k = 1; k < K; ++k) {
      out.col(c) += (r[static_cast<Eigen::Index>(k)] / total) * -pd[k].col(c);
    }
  }
}

double mixture_log_density_impl(const std::vector<DiffusedComponent>& comps,
                                const std::vector<double>& log_weights, double alpha_bar,
                                const Vec& x) {
  Vec terms(static_cast<Eigen::Index>(comps.size()));
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const DiffusedComponent::At at = comps[k].at(alpha_bar);
    const Vec diff = x - at.mean;
    terms[static_cast<Eigen::Index>(k)] =
        log_weights[k] + at.log_norm - 0.5 * diff.dot(at.precision * diff);
  }
  const double top = terms.maxCoeff();
  if (!std::isfinite(top)) return -std::numeric_limits<double>::infinity();
  return top + std::log((terms.array() - top).exp().sum());
}

void check_point(int dim, const Vec& x) {
  if (x.size() != dim) {
    throw ParameterError("point has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(dim));
  }
}

std::vector<double> log_weights_of(const MixtureSpec& spec) {
  std::vector<double> lw;
  lw.reserve(spec.weights.size());
  for (double w : spec.weights) lw.push_back(std::log(w));
  return lw;
}

std::vector<DiffusedComponent> components_of(const MixtureSpec& spec) {
  std::vector<DiffusedComponent> comps;
  comps.reserve(spec.components.size());
  for (const auto& c : spec.components) comps.emplace_back(c);
  return comps;
}

}  // namespace

void GaussianSpec::validate() const {
  if (mean.size() < 1) throw ParameterError("Gaussian dimension must be >= 1");
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw ParameterError("covariance shape does not match the mean");
  }
  if (!mean.allFinite() || !cov.allFinite()) throw ParameterError("Gaussian has non-finite entries");
  if (!is_symmetric(cov, 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff()))) {
    throw ParameterError("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(cov, Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues().minCoeff() > 0.0)) {
    throw ParameterError("covariance is not positive definite");
  }
}

GaussianSpec GaussianSpec::isotropic(int dim, double variance, double mean_value) {
  if (dim < 1) throw ParameterError("Gaussian dimension must be >= 1");
  GaussianSpec g{Vec::Constant(dim, mean_value), variance * Mat::Identity(dim, dim)};
  g.validate();
  return g;
}

int MixtureSpec::dim() const {
  if (components.empty()) throw ParameterError("mixture has no components");
  return components.front().dim();
}

void MixtureSpec::validate() const {
  if (components.empty()) throw ParameterError("mixture has no components");
  if (weights.size() != components.size()) {
    throw ParameterError("mixture weight count does not match component count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("mixture weights must be > 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("mixture weights must sum to 1");
  const int d = components.front().dim();
  for (const auto& c : components) {
    c.validate();
    if (c.dim() != d) throw ParameterError("mixture components differ in dimension");
  }
}

GaussianMoments gaussian_marginal(const GaussianSpec& spec, const NoiseSchedule& schedule, int i) {
  spec.validate();
  const double ab = schedule.alpha_bar(i);
  const int d = spec.dim();
  return {std::sqrt(ab) * spec.mean, Mat::Identity(d, d) + ab * (spec.cov - Mat::Identity(d, d))};
}

Vec gaussian_score(const GaussianSpec& spec, const NoiseSchedule& schedule, int i, const Vec& x) {
  spec.validate();
  check_point(spec.dim(), x);
  Mat out;
  gaussian_batch(DiffusedComponent(spec), schedule.alpha_bar(i), x, out);
  return out.col(0);
}

double gaussian_log_density(const GaussianSpec& spec, const NoiseSchedule& schedule, int i,
                            const Vec& x) {
  spec.validate();
  check_point(spec.dim(), x);
  return mixture_log_density_impl({DiffusedComponent(spec)}, {0.0}, schedule.alpha_bar(i), x);
}

Vec mixture_score(const MixtureSpec& spec, const NoiseSchedule& schedule, int i, const Vec& x) {
  spec.validate();
  check_point(spec.dim(), x);
  Mat out;
  mixture_batch(components_of(spec), log_weights_of(spec), schedule.alpha_bar(i), x, out);
  return out.col(0);
}

double mixture_log_density(const MixtureSpec& spec, const NoiseSchedule& schedule, int i,
                           const Vec& x) {
  spec.validate();
  check_point(spec.dim(), x);
  return mixture_log_density_impl(components_of(spec), log_weights_of(spec),
                                  schedule.alpha_bar(i), x);
}

struct ScoreField::Impl {
  std::variant<GaussianOracle, MixtureOracle, MlpScoreNet> backend;
};

ScoreField ScoreField::gaussian(GaussianSpec spec) {
  spec.validate();
  DiffusedComponent comp(spec);
  return ScoreField(std::make_shared<const Impl>(
      Impl{GaussianOracle{std::move(spec), std::move(comp)}}));
}

ScoreField ScoreField::mixture(MixtureSpec spec) {
  spec.validate();
  auto lw = log_weights_of(spec);
  auto comps = components_of(spec);
  return ScoreField(std::make_shared<const Impl>(
      Impl{MixtureOracle{std::move(spec), std::move(lw), std::move(comps)}}));
}

ScoreField ScoreField::network(MlpScoreNet net) {
  if (net.dim < 1 || net.weights.empty() || !net.all_finite()) {
    throw ParameterError("network is empty or has non-finite parameters");
  }
  return ScoreField(std::make_shared<const Impl>(Impl{std::move(net)}));
}

ScoreField::Kind ScoreField::kind() const noexcept {
  switch (impl_->backend.index()) {
    case 0: return Kind::gaussian_oracle;
    case 1: return Kind::mixture_oracle;
    default: return Kind::trained_net;
  }
}

std::string ScoreField::tag() const {
  switch (kind()) {
    case Kind::gaussian_oracle: return "gaussian-oracle";
    case Kind::mixture_oracle: return "mixture-oracle";
    case Kind::trained_net: return "trained-net";
  }
  throw InternalError("unknown score field kind");
}

int ScoreField::dim() const noexcept {
  return std::visit(
      [](const auto& b) -> int {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, MlpScoreNet>) {
          return b.dim;
        } else {
          return b.spec.dim();
        }
      },
      impl_->backend);
}

ScoreField ScoreField::with_temperature(double tau) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("temperature must be > 0");
  ScoreField f = *this;
  f.scale_ = 1.0 / tau;
  return f;
}

ScoreField ScoreField::unscaled() const {
  ScoreField f = *this;
  f.scale_ = 1.0;
  return f;
}

void ScoreField::score_batch(const NoiseSchedule& schedule, int i, const Mat& points,
                             Mat& out) const {
  if (points.rows() != dim()) {
    throw ParameterError("points have dimension " + std::to_string(points.rows()) +
                         ", field expects " + std::to_string(dim()));
  }
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, GaussianOracle>) {
          gaussian_batch(b.comp, schedule.alpha_bar(i), points, out);
        } else if constexpr (std::is_same_v<T, MixtureOracle>) {
          mixture_batch(b.comps, b.log_weights, schedule.alpha_bar(i), points, out);
        } else {
          net_score_batch(b, schedule, i, points, out);
        }
      },
      impl_->backend);
  if (scale_ != 1.0) out *= scale_;
}

Vec ScoreField::score(const NoiseSchedule& schedule, int i, const Vec& x) const {
  Mat out;
  score_batch(schedule, i, x, out);
  return out.col(0);
}

const GaussianSpec* ScoreField::gaussian_spec() const noexcept {
  const auto* g = std::get_if<GaussianOracle>(&impl_->backend);
  return g ? &g->spec : nullptr;
}

const MixtureSpec* ScoreField::mixture_spec() const noexcept {
  const auto* m = std::get_if<MixtureOracle>(&impl_->backend);
  return m ? &m->spec : nullptr;
}

const MlpScoreNet* ScoreField::net() const noexcept {
  return std::get_if<MlpScoreNet>(&impl_->backend);
}

}  // namespace bnslab
