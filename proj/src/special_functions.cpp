#include "oscil/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oscil {
namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-16;

// Regularized lower incomplete gamma P(s, x) by its power series,
// valid and fast for x < s + 1.
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double a = s;
  for (int i = 0; i < kMaxIter; ++i) {
    a += 1.0;
    term *= x / a;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Regularized upper incomplete gamma Q(s, x) by the Lentz continued
// fraction, valid for x >= s + 1.
double gamma_q_cf(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double gamma_upper_regularized(double s, double x) {
  if (!(s > 0.0) || !(x >= 0.0))
    throw std::invalid_argument("gamma_upper_regularized: need s > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

double gamma_upper(double s, double x) {
  return gamma_upper_regularized(s, x) * std::tgamma(s);
}

double factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial: negative argument");
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace oscil
