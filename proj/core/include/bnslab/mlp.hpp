#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "bnslab/linalg.hpp"
#include "bnslab/rng.hpp"
#include "bnslab/schedule.hpp"

namespace bnslab {

/// Fully connected noise-prediction network eps_hat(x, i/N).
///
/// Layer l maps widths[l] -> widths[l + 1]; the input width is d + 1 (the
/// point plus the scalar time i/N) and the output width is d. Hidden layers
/// use SiLU, the output layer is linear.
struct MlpScoreNet {
  int dim = 0;
  std::vector<int> widths;
  std::vector<Mat> weights;  // weights[l]: widths[l+1] x widths[l]
  std::vector<Vec> biases;   // biases[l]:  widths[l+1]

  static MlpScoreNet initialize(int dim, const std::vector<int>& hidden, std::uint64_t seed);

  int n_layers() const noexcept { return static_cast<int>(weights.size()); }
  std::size_t n_parameters() const;
  bool all_finite() const;

  /// Batched forward pass. `input` is (d + 1) x n, returns d x n.
  Mat forward(const Mat& input) const;

  /// Squared-error loss mean_n ||forward(input) - target||^2 and its gradient
  /// with respect to every weight and bias (same layout as the parameters).
  struct Gradient {
    std::vector<Mat> weights;
    std::vector<Vec> biases;
  };
  double loss_and_gradient(const Mat& input, const Mat& target, Gradient& grad) const;
};

/// Builds the (d + 1) x n network input for grid index i.
Mat network_input(const Mat& points, const NoiseSchedule& schedule, int i);

/// Score from the network: -eps_hat / sqrt(1 - alpha_bar(i)). Needs i >= 1.
Vec net_score(const MlpScoreNet& net, const NoiseSchedule& schedule, int i, const Vec& x);
void net_score_batch(const MlpScoreNet& net, const NoiseSchedule& schedule, int i,
                     const Mat& points, Mat& out);

enum class Optimizer { sgd, adam };

/// How training draws the grid index. `uniform` is i ~ U{1..N};
/// `low_noise` draws i = 1 + floor(u^2 N), concentrating on small i.
enum class TimeSampling { uniform, low_noise };

struct TrainConfig {
  int n_iterations = 20000;
  int batch_size = 256;
  double learning_rate = 2e-3;
  std::uint64_t seed = 0;
  std::vector<int> hidden{256, 256, 256};
  Optimizer optimizer = Optimizer::adam;
  TimeSampling time_sampling = TimeSampling::low_noise;
  bool linear_decay = true;

  void validate() const;
};

/// Draws n clean data points as a d x n matrix.
struct DataSampler {
  int dim = 0;
  std::function<Mat(RngStream&, int)> draw;
};

struct TrainResult {
  MlpScoreNet net;
  std::vector<double> losses;  // per-iteration minibatch loss
};

/// Denoising score matching: minimise E ||eps_hat(sqrt(ab) x0 + sqrt(1-ab) eps, i) - eps||^2.
TrainResult dsm_train(const DataSampler& data, const NoiseSchedule& schedule,
                      const TrainConfig& config);

/// Flat binary format: "BNS1", u32 dim, u32 layer count, u32 widths[layers + 1],
/// then per layer the row-major weights followed by the bias, all f64; every
/// field little-endian.
void save_net(const MlpScoreNet& net, const std::filesystem::path& path);
MlpScoreNet load_net(const std::filesystem::path& path);

}  // namespace bnslab
