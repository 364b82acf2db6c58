#pragma once

#include <algorithm>
#include <vector>

#include "bnslab/linalg.hpp"
#include "bnslab/rng.hpp"

namespace bnslab::detail {

// Step noise for a block of trajectories, drawn `chunk` steps at a time per
// trajectory. Each stream still yields its draws in step order, so the values
// match drawing one step at a time.
class NoiseBuffer {
 public:
  NoiseBuffer(int dim, int n_noisy_steps, std::vector<RngStream>& rngs, int chunk = 32)
      : dim_(dim), n_noisy_(n_noisy_steps), chunk_(chunk), rngs_(rngs),
        buffer_(static_cast<Eigen::Index>(dim) * chunk, static_cast<Eigen::Index>(rngs.size())),
        step_(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(rngs.size())) {}

  // Noise for the k-th noisy step (k = 0, 1, ... in order).
  const Mat& next(int k) {
    const int slot = k % chunk_;
    if (slot == 0) {
      const int steps = std::min(chunk_, n_noisy_ - k);
      const auto len = static_cast<std::size_t>(steps) * static_cast<std::size_t>(dim_);
      for (std::size_t c = 0; c < rngs_.size(); ++c) {
        rngs_[c].fill_normal({buffer_.col(static_cast<Eigen::Index>(c)).data(), len});
      }
    }
    step_ = buffer_.middleRows(static_cast<Eigen::Index>(slot) * dim_, dim_);
    return step_;
  }

 private:
  int dim_;
  int n_noisy_;
  int chunk_;
  std::vector<RngStream>& rngs_;
  Mat buffer_;
  Mat step_;
};

}  // namespace bnslab::detail
