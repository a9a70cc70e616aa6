#pragma once

#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oscil {

/// One monomial-exponential term  c * t^p * e^(q t).
struct CoefTerm {
  double c = 0.0;  ///< coefficient, >= 0
  double p = 0.0;  ///< power of t, >= 0
  double q = 0.0;  ///< exponential rate per unit t
};

/// Nonnegative coefficient function
///
///   a(t) = sum_i  c_i * t^{p_i} * e^{q_i t},   t in [0, inf)
///
/// with every c_i >= 0 and p_i >= 0, so a >= 0 everywhere, a is summable on
/// each finite segment, and each improper integral over a admits an exact
/// convergence/divergence verdict next to the numeric one.
class CoefFn {
 public:
  CoefFn() = default;

  explicit CoefFn(std::vector<CoefTerm> terms) : terms_(std::move(terms)) {
    for (const CoefTerm& t : terms_) {
      if (!(t.c >= 0.0) || !std::isfinite(t.c))
        throw std::invalid_argument("CoefFn: term coefficient must be finite and >= 0");
      if (!(t.p >= 0.0) || !std::isfinite(t.p))
        throw std::invalid_argument("CoefFn: term power must be finite and >= 0");
      if (!std::isfinite(t.q))
        throw std::invalid_argument("CoefFn: term rate must be finite");
    }
  }

  CoefFn(std::initializer_list<CoefTerm> terms)
      : CoefFn(std::vector<CoefTerm>(terms)) {}

  const std::vector<CoefTerm>& terms() const noexcept { return terms_; }

  /// True when the function is identically zero (no terms, or all c == 0).
  bool is_zero() const noexcept {
    for (const CoefTerm& t : terms_)
      if (t.c > 0.0) return false;
    return true;
  }

  /// Pointwise evaluation for t >= 0.  std::pow(0, 0) == 1, so constant terms
  /// are well defined at t = 0.
  double operator()(double t) const {
    double s = 0.0;
    for (const CoefTerm& term : terms_)
      s += term.c * std::pow(t, term.p) * std::exp(term.q * t);
    return s;
  }

  /// The same function with every coefficient multiplied by k >= 0.
  CoefFn scaled(double k) const {
    std::vector<CoefTerm> t = terms_;
    for (CoefTerm& term : t) term.c *= k;
    return CoefFn(std::move(t));
  }

 private:
  std::vector<CoefTerm> terms_;
};

/// Free-function form of pointwise evaluation.
inline double eval_coef(const CoefFn& a, double t) { return a(t); }

}  // namespace oscil
