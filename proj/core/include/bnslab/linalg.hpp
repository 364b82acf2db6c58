#pragma once

#include <Eigen/Dense>

namespace bnslab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Eigenvalues below this are clamped before inversion or square roots.
inline constexpr double kEigenFloor = 1e-12;

bool is_symmetric(const Mat& m, double tol = 1e-12);

/// Applies `f` to the (floored) eigenvalues of a symmetric matrix.
template <typename F>
Mat symmetric_function(const Mat& m, F f) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(m);
  Vec values = solver.eigenvalues().cwiseMax(kEigenFloor).unaryExpr(f);
  return solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().transpose();
}

Mat spd_inverse(const Mat& m);
Mat spd_sqrt(const Mat& m);
Mat spd_inv_sqrt(const Mat& m);

}  // namespace bnslab
