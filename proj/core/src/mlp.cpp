#include "bnslab/mlp.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <string>

#include "bnslab/errors.hpp"

namespace bnslab {

namespace {

constexpr std::array<char, 4> kMagic{'B', 'N', 'S', '1'};
constexpr std::uint32_t kMaxWidth = 1u << 16;

// Eigen's packet exp keeps these vectorised; exp(-z) = inf gives s = 0 cleanly.
Mat sigmoid(const Mat& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

void silu_inplace(Mat& z) { z.array() *= sigmoid(z).array(); }

// d silu / dz = s (1 + z (1 - s)), s = sigmoid(z)
Mat silu_grad(const Mat& z) {
  const Eigen::ArrayXXd s = sigmoid(z).array();
  return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

void check_net(const MlpScoreNet& net) {
  if (net.dim < 1 || net.weights.empty() || net.weights.size() != net.biases.size() ||
      net.widths.size() != net.weights.size() + 1) {
    throw ParameterError("malformed network");
  }
}

}  // namespace

MlpScoreNet MlpScoreNet::initialize(int dim, const std::vector<int>& hidden, std::uint64_t seed) {
  if (dim < 1) throw ParameterError("network dimension must be >= 1");
  MlpScoreNet net;
  net.dim = dim;
  net.widths.push_back(dim + 1);
  for (int h : hidden) {
    if (h < 1) throw ParameterError("hidden widths must be >= 1");
    net.widths.push_back(h);
  }
  net.widths.push_back(dim);

  RngStream rng(seed, 0);
  for (std::size_t l = 0; l + 1 < net.widths.size(); ++l) {
    const int in = net.widths[l];
    const int out = net.widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Mat w(out, in);
    Vec b(out);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = bound * (2.0 * rng.uniform() - 1.0);
    for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = bound * (2.0 * rng.uniform() - 1.0);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  return net;
}

std::size_t MlpScoreNet::n_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

bool MlpScoreNet::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

Mat MlpScoreNet::forward(const Mat& input) const {
  check_net(*this);
  if (input.rows() != widths.front()) throw ParameterError("network input has wrong row count");
  Mat a = input;
  const int last = n_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Mat z = weights[l] * a;
    z.colwise() += biases[l];
    if (l < last) silu_inplace(z);
    a = std::move(z);
  }
  return a;
}

double MlpScoreNet::loss_and_gradient(const Mat& input, const Mat& target, Gradient& grad) const {
  check_net(*this);
  const int L = n_layers();
  const auto n = static_cast<double>(input.cols());
  std::vector<Mat> pre(static_cast<std::size_t>(L));
  std::vector<Mat> act(static_cast<std::size_t>(L));  // act[l] is the input of layer l
  act[0] = input;
  Mat out;
  for (int l = 0; l < L; ++l) {
    Mat z = weights[l] * act[l];
    z.colwise() += biases[l];
    if (l + 1 < L) {
      pre[l] = z;
      silu_inplace(z);
      act[l + 1] = std::move(z);
    } else {
      out = std::move(z);
    }
  }
  Mat delta = out - target;
  const double loss = delta.squaredNorm() / n;
  delta *= 2.0 / n;

  grad.weights.resize(static_cast<std::size_t>(L));
  grad.biases.resize(static_cast<std::size_t>(L));
  for (int l = L - 1; l >= 0; --l) {
    grad.weights[l].noalias() = delta * act[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Mat back = weights[l].transpose() * delta;
      delta = back.cwiseProduct(silu_grad(pre[l - 1]));
    }
  }
  return loss;
}

Mat network_input(const Mat& points, const NoiseSchedule& schedule, int i) {
  if (i < 1 || i > schedule.n_steps()) throw ParameterError("network index must lie in [1, N]");
  Mat in(points.rows() + 1, points.cols());
  in.topRows(points.rows()) = points;
  in.row(points.rows()).setConstant(static_cast<double>(i) / schedule.n_steps());
  return in;
}

void net_score_batch(const MlpScoreNet& net, const NoiseSchedule& schedule, int i,
                     const Mat& points, Mat& out) {
  if (points.rows() != net.dim) {
    throw ParameterError("point dimension " + std::to_string(points.rows()) +
                         " does not match network dimension " + std::to_string(net.dim));
  }
  out = net.forward(network_input(points, schedule, i));
  out *= -1.0 / std::sqrt(1.0 - schedule.alpha_bar(i));
}

Vec net_score(const MlpScoreNet& net, const NoiseSchedule& schedule, int i, const Vec& x) {
  Mat out;
  net_score_batch(net, schedule, i, x, out);
  return out.col(0);
}

void TrainConfig::validate() const {
  if (n_iterations < 0) throw ParameterError("n_iterations must be >= 0");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ParameterError("learning_rate must be finite and > 0");
  }
  for (int h : hidden) {
    if (h < 1) throw ParameterError("hidden widths must be >= 1");
  }
}

TrainResult dsm_train(const DataSampler& data, const NoiseSchedule& schedule,
                      const TrainConfig& config) {
  config.validate();
  if (data.dim < 1 || !data.draw) throw ParameterError("data sampler is empty");
  TrainResult result{MlpScoreNet::initialize(data.dim, config.hidden, config.seed), {}};
  MlpScoreNet& net = result.net;
  const int L = net.n_layers();
  const int N = schedule.n_steps();
  const int B = config.batch_size;

  RngStream data_rng(config.seed, 1);
  RngStream noise_rng(config.seed, 2);

  std::vector<Mat> m_w(L), v_w(L);
  std::vector<Vec> m_b(L), v_b(L);
  for (int l = 0; l < L; ++l) {
    m_w[l] = Mat::Zero(net.weights[l].rows(), net.weights[l].cols());
    v_w[l] = m_w[l];
    m_b[l] = Vec::Zero(net.biases[l].size());
    v_b[l] = m_b[l];
  }
  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps_adam = 1e-8;

  MlpScoreNet::Gradient grad;
  Mat input(data.dim + 1, B);
  Mat eps(data.dim, B);
  result.losses.reserve(static_cast<std::size_t>(config.n_iterations));

  for (int it = 0; it < config.n_iterations; ++it) {
    const Mat x0 = data.draw(data_rng, B);
    if (x0.rows() != data.dim || x0.cols() != B) {
      throw ParameterError("data sampler returned a matrix of the wrong shape");
    }
    for (int c = 0; c < B; ++c) {
      const double u = noise_rng.uniform();
      int i = config.time_sampling == TimeSampling::low_noise
                  ? 1 + static_cast<int>(u * u * N)
                  : 1 + static_cast<int>(u * N);
      i = std::min(i, N);
      const double ab = schedule.alpha_bar(i);
      const double sa = std::sqrt(ab);
      const double sb = std::sqrt(1.0 - ab);
      for (int r = 0; r < data.dim; ++r) {
        const double e = noise_rng.normal();
        eps(r, c) = e;
        input(r, c) = sa * x0(r, c) + sb * e;
      }
      input(data.dim, c) = static_cast<double>(i) / N;
    }

    const double loss = net.loss_and_gradient(input, eps, grad);
    if (!std::isfinite(loss)) throw TrainingError("non-finite training loss", it);
    result.losses.push_back(loss);

    double lr = config.learning_rate;
    if (config.linear_decay) lr *= 1.0 - static_cast<double>(it) / config.n_iterations;

    if (config.optimizer == Optimizer::sgd) {
      for (int l = 0; l < L; ++l) {
        net.weights[l] -= lr * grad.weights[l];
        net.biases[l] -= lr * grad.biases[l];
      }
    } else {
      const double c1 = 1.0 - std::pow(b1, it + 1);
      const double c2 = 1.0 - std::pow(b2, it + 1);
      auto adam = [&](auto& p, auto& m, auto& v, const auto& g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseAbs2();
        p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_adam);
      };
      for (int l = 0; l < L; ++l) {
        adam(net.weights[l], m_w[l], v_w[l], grad.weights[l]);
        adam(net.biases[l], m_b[l], v_b[l], grad.biases[l]);
      }
    }
    if (!net.all_finite()) throw TrainingError("non-finite network parameters", it);
  }
  return result;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffU);
  os.write(b.data(), 4);
}

void put_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> b{};
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xffU);
  os.write(b.data(), 8);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw ParameterError("truncated network file");
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

double get_f64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw ParameterError("truncated network file");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

}  // namespace

void save_net(const MlpScoreNet& net, const std::filesystem::path& path) {
  check_net(net);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParameterError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), 4);
  put_u32(os, static_cast<std::uint32_t>(net.dim));
  put_u32(os, static_cast<std::uint32_t>(net.n_layers()));
  for (int w : net.widths) put_u32(os, static_cast<std::uint32_t>(w));
  for (int l = 0; l < net.n_layers(); ++l) {
    const Mat& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) put_f64(os, w(r, c));
    }
    for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) put_f64(os, net.biases[l][r]);
  }
  if (!os) throw ParameterError("failed writing " + path.string());
}

MlpScoreNet load_net(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kMagic) {
    throw ParameterError(path.string() + " is not a network file");
  }
  MlpScoreNet net;
  const std::uint32_t dim = get_u32(is);
  const std::uint32_t layers = get_u32(is);
  if (dim < 1 || dim > kMaxWidth || layers < 1 || layers > 64) {
    throw ParameterError("implausible network header in " + path.string());
  }
  net.dim = static_cast<int>(dim);
  for (std::uint32_t k = 0; k <= layers; ++k) {
    const std::uint32_t w = get_u32(is);
    if (w < 1 || w > kMaxWidth) throw ParameterError("implausible layer width");
    net.widths.push_back(static_cast<int>(w));
  }
  if (net.widths.front() != net.dim + 1 || net.widths.back() != net.dim) {
    throw ParameterError("layer widths do not match the network dimension");
  }
  for (std::uint32_t l = 0; l < layers; ++l) {
    Mat w(net.widths[l + 1], net.widths[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = get_f64(is);
    }
    Vec b(net.widths[l + 1]);
    for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = get_f64(is);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw ParameterError("trailing bytes in " + path.string());
  }
  return net;
}

}  // namespace bnslab
