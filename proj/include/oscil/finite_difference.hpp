#pragma once

#include <Eigen/Core>
#include <stdexcept>

namespace oscil {

/// Fornberg finite-difference weights: for nodes x[0..m-1] and expansion
/// point x0, returns W of size m x (max_order+1) such that
///   d^k f / dx^k (x0)  ~=  sum_i W(i, k) f(x[i]).
inline Eigen::MatrixXd fd_weights(double x0, const Eigen::VectorXd& x,
                                  int max_order) {
  const int m = static_cast<int>(x.size());
  if (m < max_order + 1)
    throw std::invalid_argument("fd_weights: need at least order+1 nodes");
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(m, max_order + 1);
  double c1 = 1.0;
  double c4 = x[0] - x0;
  W(0, 0) = 1.0;
  for (int i = 1; i < m; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          W(i, k) = c1 * (k * W(i - 1, k - 1) - c5 * W(i - 1, k)) / c2;
        W(i, 0) = -c1 * c5 * W(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k)
        W(j, k) = (c4 * W(j, k) - k * W(j, k - 1)) / c3;
      W(j, 0) = c4 * W(j, 0) / c3;
    }
    c1 = c2;
  }
  return W;
}

/// order-th derivative of sampled values f on nodes t at interior index i,
/// using a centered window of order+3 points (at least second-order accurate,
/// also on smoothly graded nonuniform grids).
inline double fd_derivative(const Eigen::VectorXd& t, const Eigen::VectorXd& f,
                            int i, int order) {
  const int n = static_cast<int>(t.size());
  const int w = order + 3;  // window size
  int lo = i - w / 2;
  lo = std::max(0, std::min(lo, n - w));
  if (lo < 0) throw std::invalid_argument("fd_derivative: too few samples");
  const Eigen::VectorXd nodes = t.segment(lo, w);
  const Eigen::MatrixXd W = fd_weights(t[i], nodes, order);
  double d = 0.0;
  for (int j = 0; j < w; ++j) d += W(j, order) * f[lo + j];
  return d;
}

}  // namespace oscil
