#pragma once

#include <cmath>
#include <queue>
#include <utility>
#include <vector>

#include "oscil/errors.hpp"

namespace oscil {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1] (nonnegative abscissae).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kGk15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGauss7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <class F>
std::pair<double, double> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kGk15Nodes[i]);
    fv[14 - i] = f(c + h * kGk15Nodes[i]);
  }
  fv[7] = f(c);
  double kron = kGk15Weights[7] * fv[7];
  double gauss = kGauss7Weights[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kron += kGk15Weights[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1)  // Kronrod nodes 1, 3, 5 are the Gauss-7 nodes
      gauss += kGauss7Weights[i / 2] * (fv[i] + fv[14 - i]);
  }
  return {kron * h, std::abs(kron - gauss) * h};
}

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

}  // namespace detail

/// Globally adaptive Gauss7/Kronrod15 quadrature on the finite interval
/// [a, b]: bisects the segment with the largest error estimate until the
/// summed estimate drops below max(abs_tol, rel_tol * |value|).
///
/// Throws QuadratureFailure when the subdivision budget is exhausted with the
/// tolerance unmet, and when the integrand produces non-finite values.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    double rel_tol = 0.0,
                                    int max_intervals = 2000) {
  if (a == b) return {0.0, 0.0, 0};
  std::priority_queue<detail::Segment> heap;
  auto [v0, e0] = detail::gk15(f, a, b);
  heap.push({a, b, v0, e0});
  double total_v = v0, total_e = e0;
  int n = 1;
  while (total_e > std::max(abs_tol, rel_tol * std::abs(total_v))) {
    if (!std::isfinite(total_v) || !std::isfinite(total_e))
      throw QuadratureFailure("integrate_adaptive: non-finite integrand");
    if (n >= max_intervals)
      throw QuadratureFailure("integrate_adaptive: subdivision budget exhausted");
    detail::Segment s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    auto [vl, el] = detail::gk15(f, s.a, m);
    auto [vr, er] = detail::gk15(f, m, s.b);
    total_v += vl + vr - s.value;
    total_e += el + er - s.error;
    heap.push({s.a, m, vl, el});
    heap.push({m, s.b, vr, er});
    ++n;
  }
  if (!std::isfinite(total_v))
    throw QuadratureFailure("integrate_adaptive: non-finite integrand");
  return {total_v, total_e, n};
}

/// Non-throwing variant used by the divergence sweep: when the integrand
/// blows up or the budget runs out, returns the best partial answer (possibly
/// infinite) instead of throwing.
template <class F>
QuadratureResult integrate_adaptive_lenient(F&& f, double a, double b,
                                            double abs_tol, double rel_tol = 0.0,
                                            int max_intervals = 2000) {
  try {
    return integrate_adaptive(std::forward<F>(f), a, b, abs_tol, rel_tol,
                              max_intervals);
  } catch (const QuadratureFailure&) {
    auto [v, e] = detail::gk15(f, a, b);
    return {v, e, 1};
  }
}

}  // namespace oscil
