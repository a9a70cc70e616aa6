#pragma once

#include <cmath>
#include <vector>

#include "oscil/coef_fn.hpp"

namespace oscil {

/// |y|^lam * sign y, continuous at 0 (derivative unbounded there for lam < 1).
inline double signed_power(double y, double lam) {
  if (y == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(y), lam), y);
}

/// How the nonlinearities relate to the power-law envelope:
/// a one-sided lower bound only, or the exact two-sided power law (the
/// sandwich with constant M that the necessity construction requires).
enum class Envelope { OneSidedLower, TwoSidedExactPowerLaw };

/// The coupled system
///
///   x1^(n1) = f1(t, x2),    f1(t, y) =  a1(t) |y|^lambda1 sign y
///   x2^(n2) = f2(t, x1),    f2(t, y) = -a2(t) |y|^lambda2 sign y
///
/// The alternating sign pattern lives in the induced f2.  In two-sided mode
/// these induced nonlinearities satisfy the envelope with M = 1; M is kept as
/// a field because the criteria statements allow any M >= 1.
struct SystemSpec {
  int n1 = 1;
  int n2 = 1;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  CoefFn a1, a2;
  Envelope envelope = Envelope::TwoSidedExactPowerLaw;
  double M = 1.0;

  double f1(double t, double x2) const { return a1(t) * signed_power(x2, lambda1); }
  double f2(double t, double x1) const { return -a2(t) * signed_power(x1, lambda2); }

  /// Role swap x1 <-> x2 (a1 <-> a2, n1 <-> n2, lambda1 <-> lambda2).  The
  /// sign pattern re-attaches to the new f2, so a solution (y1, y2) of the
  /// swapped system maps to the solution (-y2, y1) of this one, preserving
  /// zeros and hence every oscillation verdict.
  SystemSpec swapped() const {
    SystemSpec s = *this;
    std::swap(s.n1, s.n2);
    std::swap(s.lambda1, s.lambda2);
    std::swap(s.a1, s.a2);
    return s;
  }
};

/// Hypothesis violations reported by validate_hypotheses.
enum class Violation {
  Lambda1NotPositive,
  Lambda2NotPositive,
  LambdaProductNotGreaterThanOne,
  OrderLessThanOne,
  NegativeCoefficient,
  EnvelopeConstantLessThanOne,
};

const char* to_string(Violation v);

/// Empty iff lambda_i > 0, lambda1*lambda2 > 1, orders >= 1, all coefficient
/// terms have c >= 0, and (in two-sided mode) M >= 1.
std::vector<Violation> validate_hypotheses(const SystemSpec& spec);

}  // namespace oscil
