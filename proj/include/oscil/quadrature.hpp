#pragma once

#include <stdexcept>
#include <vector>

#include "oscil/coef_fn.hpp"
#include "oscil/errors.hpp"

namespace oscil {

/// Tolerances and horizons for the improper-integral engine.
struct QuadConfig {
  double quad_tol = 1e-10;      ///< relative tolerance for converged values
  double horizon_max = 1e6;     ///< largest finite upper limit probed
  double div_threshold = 1e8;   ///< partial-sum magnitude declaring numeric divergence
  double horizon_growth = 2.0;  ///< multiplicative horizon schedule factor

  void validate() const {
    if (!(quad_tol > 0.0 && quad_tol < 1.0))
      throw std::invalid_argument("QuadConfig: quad_tol must lie in (0, 1)");
    if (!(horizon_max > 0.0))
      throw std::invalid_argument("QuadConfig: horizon_max must be positive");
    if (!(div_threshold > 1.0))
      throw std::invalid_argument("QuadConfig: div_threshold must exceed 1");
    if (!(horizon_growth > 1.0))
      throw std::invalid_argument("QuadConfig: horizon_growth must exceed 1");
  }
};

/// One entry of the partial-sum growth log recorded by the horizon sweep.
struct HorizonSample {
  double horizon = 0.0;
  double partial_sum = 0.0;
};

/// Why an improper integral was declared divergent: the dominant asymptotic
/// rate/power of the integrand and the observed partial-sum growth.
struct DivergenceEvidence {
  double q_star = 0.0;  ///< dominant exponential rate
  double m_star = 0.0;  ///< dominant power of t at that rate
  std::vector<HorizonSample> partial_sums;
};

/// Outcome of an improper integral: Converged(value, error estimate) or
/// Divergent(evidence).
class IntegralVerdict {
 public:
  static IntegralVerdict converged(double value, double error_estimate) {
    IntegralVerdict v;
    v.convergent_ = true;
    v.value_ = value;
    v.error_estimate_ = error_estimate;
    return v;
  }
  static IntegralVerdict divergent(DivergenceEvidence ev) {
    IntegralVerdict v;
    v.convergent_ = false;
    v.evidence_ = std::move(ev);
    return v;
  }

  bool is_convergent() const noexcept { return convergent_; }
  bool is_divergent() const noexcept { return !convergent_; }

  double value() const {
    require(convergent_, "value() on a divergent verdict");
    return value_;
  }
  double error_estimate() const {
    require(convergent_, "error_estimate() on a divergent verdict");
    return error_estimate_;
  }
  const DivergenceEvidence& evidence() const {
    require(!convergent_, "evidence() on a convergent verdict");
    return evidence_;
  }

 private:
  IntegralVerdict() = default;
  static void require(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("IntegralVerdict: ") + what);
  }

  bool convergent_ = false;
  double value_ = 0.0;
  double error_estimate_ = 0.0;
  DivergenceEvidence evidence_;
};

// All operations in this header are pure functions of their arguments, with
// no shared mutable state; they may be called concurrently.

/// Moment integral
///   int_0^inf  t^{n-1}/(n-1)!  a(t) dt.
///
/// The exact path decides each term by: divergent iff q > 0, or q = 0 with
/// n-1+p >= -1; convergent q < 0 terms have the closed form
/// c Gamma(n+p) / ((n-1)! (-q)^{n+p}).  The numeric path must agree or
/// NumericSymbolicMismatch is thrown.  Converged verdicts carry the numeric
/// value, cross-checked against the closed form.
IntegralVerdict moment_integral(const CoefFn& a, int n, const QuadConfig& cfg);

/// Tail-kernel integral
///   A(t) = int_t^inf  (tau-t)^{n-1}/(n-1)!  a(tau) dtau
/// with relative error <= quad_tol.  Throws TailDiverges when the moment
/// integral of (a, n) diverges.
double tail_kernel_integral(const CoefFn& a, int n, double t,
                            const QuadConfig& cfg);

/// Nested criterion integral
///   int_0^inf  t^{n_o-1}/(n_o-1)!  a_outer(t) [ A_inner(t) ]^lambda dt
/// where A_inner is the tail-kernel integral of (a_inner, n_inner).
/// Requires the inner moment integral to converge (TailDiverges otherwise).
IntegralVerdict nested_criterion_integral(const CoefFn& a_outer, int n_outer,
                                          const CoefFn& a_inner, int n_inner,
                                          double lambda_outer,
                                          const QuadConfig& cfg);

/// Shifted nested integral used by the fixed-point construction:
///   int_T^inf  (s-T)^{n_o-1}/(n_o-1)!  a_outer(s) [ A_inner(s) ]^lambda ds.
/// Throws TailDiverges when the unshifted integral diverges.
double shifted_nested_integral(const CoefFn& a_outer, int n_outer,
                               const CoefFn& a_inner, int n_inner,
                               double lambda_outer, double T,
                               const QuadConfig& cfg);

/// Exact remainder of the moment integral past H:
///   int_H^inf t^{n-1}/(n-1)! a(t) dt;  +inf when any term has q >= 0.
double moment_tail_bound(const CoefFn& a, int n, double H);

/// Analytic upper bound on the nested integrand's tail past H >= 1,
/// using the majorant A_inner(t) <= C t^m e^{q* t} valid for t >= 1.
double nested_tail_bound(const CoefFn& a_outer, int n_outer,
                         const CoefFn& a_inner, int n_inner,
                         double lambda_outer, double H);

}  // namespace oscil
