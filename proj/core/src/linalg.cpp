#include "bnslab/linalg.hpp"

#include <cmath>

namespace bnslab {

bool is_symmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

Mat spd_inverse(const Mat& m) {
  return symmetric_function(m, [](double v) { return 1.0 / v; });
}

Mat spd_sqrt(const Mat& m) {
  return symmetric_function(m, [](double v) { return std::sqrt(v); });
}

Mat spd_inv_sqrt(const Mat& m) {
  return symmetric_function(m, [](double v) { return 1.0 / std::sqrt(v); });
}

}  // namespace bnslab
