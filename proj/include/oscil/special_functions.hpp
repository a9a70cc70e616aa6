#pragma once

namespace oscil {

/// Upper incomplete gamma function
///   Gamma(s, x) = int_x^inf u^{s-1} e^{-u} du,   s > 0, x >= 0.
double gamma_upper(double s, double x);

/// Regularized complement Q(s, x) = Gamma(s, x) / Gamma(s) in [0, 1].
double gamma_upper_regularized(double s, double x);

/// Binomial coefficient for small nonnegative integer arguments.
double binomial(int n, int k);

/// n! as a double (exact up to n = 22).
double factorial(int n);

}  // namespace oscil
