#include "bnslab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>

#include "bnslab/errors.hpp"

namespace bnslab {

namespace {

// FFTW planning is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

class Spectrum {
 public:
  Spectrum(int height, int width)
      : height_(height),
        width_(width),
        data_(fftw_alloc_complex(static_cast<std::size_t>(height) * width)) {
    if (data_ == nullptr) throw std::bad_alloc();
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_2d(height, width, data_, data_, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(height, width, data_, data_, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward_ == nullptr || backward_ == nullptr) {
      release();
      throw InternalError("FFTW could not create a plan");
    }
  }
  Spectrum(const Spectrum&) = delete;
  Spectrum& operator=(const Spectrum&) = delete;
  ~Spectrum() {
    std::lock_guard lock(planner_mutex());
    release();
  }

  void load(const Mat& values) {
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        data_[at(r, c)][0] = values(r, c);
        data_[at(r, c)][1] = 0.0;
      }
    }
  }
  void forward() { fftw_execute(forward_); }
  void backward() { fftw_execute(backward_); }

  double norm2(int r, int c) const {
    return data_[at(r, c)][0] * data_[at(r, c)][0] + data_[at(r, c)][1] * data_[at(r, c)][1];
  }
  void zero(int r, int c) {
    data_[at(r, c)][0] = 0.0;
    data_[at(r, c)][1] = 0.0;
  }
  /// Real part after a backward transform, with the 1 / (H W) normalisation.
  Mat real_part() const {
    Mat out(height_, width_);
    const double scale = 1.0 / (static_cast<double>(height_) * width_);
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) out(r, c) = data_[at(r, c)][0] * scale;
    }
    return out;
  }

 private:
  std::size_t at(int r, int c) const { return static_cast<std::size_t>(r) * width_ + c; }
  void release() {
    if (forward_ != nullptr) fftw_destroy_plan(forward_);
    if (backward_ != nullptr) fftw_destroy_plan(backward_);
    forward_ = backward_ = nullptr;
    if (data_ != nullptr) fftw_free(data_);
    data_ = nullptr;
  }

  int height_;
  int width_;
  fftw_complex* data_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

void check_field(const NoiseField& field) {
  if (field.values.rows() < 1 || field.values.cols() < 1) throw ParameterError("empty noise field");
  if (!field.values.allFinite()) throw ParameterError("noise field has non-finite entries");
}

void check_cutoff(double cutoff) {
  if (!(cutoff >= 0.0) || std::isnan(cutoff)) throw ParameterError("cutoff must be >= 0");
}

}  // namespace

NoiseField draw_noise_field(int height, int width, double gamma, RngStream& rng) {
  if (height < 1 || width < 1) throw ParameterError("field size must be positive");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
  NoiseField f{Mat(height, width), gamma};
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) f.values(r, c) = gamma * rng.normal();
  }
  return f;
}

double radial_frequency(int u, int v, int height, int width) {
  const int fu = std::min(u, height - u);
  const int fv = std::min(v, width - v);
  return std::hypot(static_cast<double>(fu), static_cast<double>(fv));
}

NoiseField filter_noise(const NoiseField& field, double cutoff, FilterKind kind) {
  check_field(field);
  check_cutoff(cutoff);
  if (kind == FilterKind::high_pass && cutoff == 0.0) return field;
  const auto h = static_cast<int>(field.values.rows());
  const auto w = static_cast<int>(field.values.cols());
  Spectrum s(h, w);
  s.load(field.values);
  s.forward();
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      const bool low = radial_frequency(u, v, h, w) <= cutoff;
      if (low != (kind == FilterKind::low_pass)) s.zero(u, v);
    }
  }
  s.backward();
  return {s.real_part(), field.gamma};
}

BandEnergy band_energy(const NoiseField& field, double cutoff) {
  check_field(field);
  check_cutoff(cutoff);
  const auto h = static_cast<int>(field.values.rows());
  const auto w = static_cast<int>(field.values.cols());
  Spectrum s(h, w);
  s.load(field.values);
  s.forward();
  BandEnergy e;
  const double scale = 1.0 / (static_cast<double>(h) * w);
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      (radial_frequency(u, v, h, w) <= cutoff ? e.low : e.high) += s.norm2(u, v) * scale;
    }
  }
  e.spatial = field.values.squaredNorm();
  return e;
}

int bins_within(int height, int width, double cutoff) {
  int n = 0;
  for (int u = 0; u < height; ++u) {
    for (int v = 0; v < width; ++v) n += radial_frequency(u, v, height, width) <= cutoff ? 1 : 0;
  }
  return n;
}

}  // namespace bnslab
