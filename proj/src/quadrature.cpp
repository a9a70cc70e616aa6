#include "oscil/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "oscil/gauss_kronrod.hpp"
#include "oscil/special_functions.hpp"

namespace oscil {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_small_integer(double p) {
  return p >= 0.0 && p <= 40.0 && p == std::floor(p);
}

// A term's slice of the moment integrand has dominant power n-1+p at rate q.
// With n >= 1 and p >= 0 the power is never below -1, so a nonzero term
// diverges exactly when q >= 0.
bool term_divergent(const CoefTerm& t, int n) {
  if (t.c <= 0.0) return false;
  return t.q > 0.0 || (t.q == 0.0 && n - 1 + t.p >= -1.0);
}

// int_H^inf t^m e^{q t} dt = Gamma(m+1, -q H) / (-q)^{m+1}   for q < 0.
double mon_exp_tail(double m, double q, double H) {
  return gamma_upper(m + 1.0, -q * H) / std::pow(-q, m + 1.0);
}

// Closed form of int_0^inf t^{n-1+p} e^{q t} dt / (n-1)!  for q < 0.
double closed_moment_term(const CoefTerm& t, int n) {
  return t.c * std::tgamma(n + t.p) /
         (factorial(n - 1) * std::pow(-t.q, n + t.p));
}

struct SweepOutcome {
  bool divergent = false;
  std::vector<HorizonSample> log;
};

// Integrate f over growing horizons 1, g, g^2, ... up to horizon_max and
// judge convergence from the partial sums: divergent when they pass
// div_threshold (or blow up), convergent when the increments die out;
// otherwise judged at the end by whether the last increments still fail to
// decay by the factor g^{-1/2}.
SweepOutcome divergence_sweep(const std::function<double(double)>& f,
                              const QuadConfig& cfg) {
  SweepOutcome out;
  double h_prev = 0.0, h = 1.0;
  double sum = 0.0;
  double inc_prev = -1.0, inc_last = -1.0;
  int small_streak = 0;
  while (true) {
    const double chunk =
        integrate_adaptive_lenient(f, h_prev, h, 1e-9 * std::max(1.0, std::abs(sum)),
                                   1e-9, 400)
            .value;
    sum += chunk;
    out.log.push_back({h, sum});
    if (!std::isfinite(sum) || std::abs(sum) > cfg.div_threshold) {
      out.divergent = true;
      return out;
    }
    if (std::abs(chunk) <= cfg.quad_tol * std::max(1.0, std::abs(sum))) {
      if (++small_streak >= 2) {
        out.divergent = false;
        return out;
      }
    } else {
      small_streak = 0;
    }
    inc_prev = inc_last;
    inc_last = std::abs(chunk);
    if (h >= cfg.horizon_max) break;
    h_prev = h;
    h = std::min(h * cfg.horizon_growth, cfg.horizon_max);
  }
  // Horizon exhausted without a clear call: increments of a convergent
  // monomial-exponential integral decay at least geometrically by now.
  const double decay = std::pow(cfg.horizon_growth, -0.5);
  out.divergent = !(inc_prev > 0.0) || inc_last > inc_prev * decay;
  if (inc_last == 0.0) out.divergent = false;
  return out;
}

// Numeric value of int_0^inf f with tail remainder bound rem(H); two passes
// so the absolute budget scales with the integral itself and the relative
// accuracy reaches quad_tol even for small values.
struct ImproperValue {
  double value;
  double error;
};

ImproperValue improper_value(const std::function<double(double)>& f,
                             const std::function<double(double)>& rem,
                             double h0, const QuadConfig& cfg) {
  // First horizon pass against an O(1) budget, then rescale the budget to the
  // rough value so small integrals still come out at relative quad_tol.
  double H = std::max(h0, 2.0);
  double tail = rem(H);
  int grows = 0;
  while (tail > 0.5 * cfg.quad_tol) {
    H *= 2.0;
    tail = rem(H);
    if (++grows > 120)
      throw QuadratureFailure("improper_value: tail bound does not shrink");
  }
  const double rough =
      integrate_adaptive_lenient(f, 0.0, H, 1e-6, 1e-6, 600).value;
  const double budget = 0.5 * cfg.quad_tol * std::max(std::abs(rough), 1e-14);
  while (tail > budget) {
    H *= 2.0;
    tail = rem(H);
    if (++grows > 150)
      throw QuadratureFailure("improper_value: tail bound does not shrink");
  }
  QuadratureResult gk =
      integrate_adaptive(f, 0.0, H, budget, 0.5 * cfg.quad_tol, 4000);
  return {gk.value, gk.error_estimate + tail};
}

// Majorant  A(t) <= C t^m e^{q t}  for t >= 1, built by rounding each term's
// power up to an integer and expanding the kernel binomially.
struct MonExpBound {
  double C = 0.0;
  double m = 0.0;
  double q = -kInf;
};

MonExpBound tail_kernel_majorant(const CoefFn& a, int n) {
  MonExpBound b;
  for (const CoefTerm& t : a.terms()) {
    if (t.c <= 0.0) continue;
    const double pbar = std::ceil(t.p);
    double coef = 0.0;
    for (int j = 0; j <= static_cast<int>(pbar); ++j)
      coef += binomial(static_cast<int>(pbar), j) * std::tgamma(n + j) /
              std::pow(-t.q, n + j);
    coef *= t.c / factorial(n - 1);
    b.C += coef;
    b.m = std::max(b.m, pbar);
    b.q = std::max(b.q, t.q);
  }
  return b;
}

// Exact A(t) for a single term with integer power p:
//   A_term(t) = c e^{q t}/(n-1)! sum_j C(p,j) t^{p-j} Gamma(n+j)/(-q)^{n+j}.
double tail_kernel_term_exact(const CoefTerm& t, int n, double x) {
  const int p = static_cast<int>(t.p);
  double s = 0.0;
  for (int j = 0; j <= p; ++j)
    s += binomial(p, j) * std::pow(x, p - j) * std::tgamma(n + j) /
         std::pow(-t.q, n + j);
  return t.c * std::exp(t.q * x) / factorial(n - 1) * s;
}

// Numeric A(t) for one term with non-integer power, via u = tau - t:
//   c e^{q t}/(n-1)! int_0^inf u^{n-1} (u+t)^p e^{q u} du.
double tail_kernel_term_numeric(const CoefTerm& t, int n, double x,
                                const QuadConfig& cfg) {
  const double scale_bound =
      tail_kernel_term_exact({t.c, std::ceil(t.p), t.q}, n, std::max(x, 1.0));
  const double budget = 0.5 * cfg.quad_tol * std::max(scale_bound, 1e-300);
  const double prefac = t.c * std::exp(t.q * x) / factorial(n - 1);
  double U = std::max({x, 1.0, 2.0 * (n - 1 + t.p) / (-t.q)});
  auto rem = [&](double u) {
    // (u + x)^p <= (2u)^p for u >= x
    return prefac * std::pow(2.0, t.p) * mon_exp_tail(n - 1 + t.p, t.q, u);
  };
  int grows = 0;
  while (rem(U) > budget) {
    U *= 2.0;
    if (++grows > 120)
      throw QuadratureFailure("tail_kernel: tail bound does not shrink");
  }
  auto g = [&](double u) {
    return std::pow(u, n - 1) * std::pow(u + x, t.p) * std::exp(t.q * u);
  };
  QuadratureResult gk = integrate_adaptive(
      g, 0.0, U, budget / std::max(prefac, 1e-300), 0.5 * cfg.quad_tol, 4000);
  return prefac * gk.value;
}

double tail_kernel_value(const CoefFn& a, int n, double x,
                         const QuadConfig& cfg) {
  double s = 0.0;
  for (const CoefTerm& t : a.terms()) {
    if (t.c <= 0.0) continue;
    s += is_small_integer(t.p) ? tail_kernel_term_exact(t, n, x)
                               : tail_kernel_term_numeric(t, n, x, cfg);
  }
  return s;
}

void check_order(int n) {
  if (n < 1) throw std::invalid_argument("integral order n must be >= 1");
}

// Divergence evidence for the moment integral: dominant rate and, among the
// divergent terms at that rate, the largest power of t.
DivergenceEvidence moment_evidence(const CoefFn& a, int n) {
  DivergenceEvidence ev;
  ev.q_star = -kInf;
  for (const CoefTerm& t : a.terms())
    if (term_divergent(t, n)) ev.q_star = std::max(ev.q_star, t.q);
  ev.m_star = -kInf;
  for (const CoefTerm& t : a.terms())
    if (term_divergent(t, n) && t.q == ev.q_star)
      ev.m_star = std::max(ev.m_star, n - 1 + t.p);
  return ev;
}

}  // namespace

double moment_tail_bound(const CoefFn& a, int n, double H) {
  check_order(n);
  double s = 0.0;
  for (const CoefTerm& t : a.terms()) {
    if (t.c <= 0.0) continue;
    if (t.q >= 0.0) return kInf;
    s += t.c / factorial(n - 1) * mon_exp_tail(n - 1 + t.p, t.q, H);
  }
  return s;
}

IntegralVerdict moment_integral(const CoefFn& a, int n, const QuadConfig& cfg) {
  check_order(n);
  cfg.validate();
  if (a.is_zero()) return IntegralVerdict::converged(0.0, 0.0);

  const double inv_fact = 1.0 / factorial(n - 1);
  auto f = [&](double t) { return std::pow(t, n - 1) * inv_fact * a(t); };

  bool divergent = false;
  double closed = 0.0;
  for (const CoefTerm& t : a.terms()) {
    if (t.c <= 0.0) continue;
    if (term_divergent(t, n))
      divergent = true;
    else
      closed += closed_moment_term(t, n);
  }

  if (divergent) {
    DivergenceEvidence ev = moment_evidence(a, n);
    SweepOutcome sweep = divergence_sweep(f, cfg);
    ev.partial_sums = std::move(sweep.log);
    if (!sweep.divergent)
      throw NumericSymbolicMismatch(
          "moment_integral: exact path divergent, numeric sweep converged");
    return IntegralVerdict::divergent(std::move(ev));
  }

  auto rem = [&](double H) { return moment_tail_bound(a, n, H); };
  ImproperValue v = improper_value(f, rem, 2.0, cfg);
  if (std::abs(v.value - closed) > 10.0 * cfg.quad_tol * std::max(1.0, closed))
    throw NumericSymbolicMismatch(
        "moment_integral: numeric value disagrees with the closed form");
  return IntegralVerdict::converged(v.value, v.error);
}

double tail_kernel_integral(const CoefFn& a, int n, double t,
                            const QuadConfig& cfg) {
  check_order(n);
  cfg.validate();
  if (t < 0.0) throw std::invalid_argument("tail_kernel_integral: t must be >= 0");
  for (const CoefTerm& term : a.terms())
    if (term_divergent(term, n))
      throw TailDiverges(
          "tail_kernel_integral: moment integral diverges, tail is infinite");
  return tail_kernel_value(a, n, t, cfg);
}

double nested_tail_bound(const CoefFn& a_outer, int n_outer,
                         const CoefFn& a_inner, int n_inner,
                         double lambda_outer, double H) {
  check_order(n_outer);
  check_order(n_inner);
  if (!(lambda_outer > 0.0))
    throw std::invalid_argument("nested_tail_bound: lambda must be positive");
  if (H < 1.0)
    throw std::invalid_argument("nested_tail_bound: majorant needs H >= 1");
  if (a_inner.is_zero() || a_outer.is_zero()) return 0.0;
  const MonExpBound ab = tail_kernel_majorant(a_inner, n_inner);
  const double c_lam = std::pow(ab.C, lambda_outer);
  double s = 0.0;
  for (const CoefTerm& t : a_outer.terms()) {
    if (t.c <= 0.0) continue;
    const double rate = t.q + lambda_outer * ab.q;
    if (rate >= 0.0) return kInf;
    const double power = n_outer - 1 + t.p + lambda_outer * ab.m;
    s += t.c / factorial(n_outer - 1) * c_lam * mon_exp_tail(power, rate, H);
  }
  return s;
}

IntegralVerdict nested_criterion_integral(const CoefFn& a_outer, int n_outer,
                                          const CoefFn& a_inner, int n_inner,
                                          double lambda_outer,
                                          const QuadConfig& cfg) {
  check_order(n_outer);
  check_order(n_inner);
  cfg.validate();
  if (!(lambda_outer > 0.0))
    throw std::invalid_argument("nested_criterion_integral: lambda must be positive");
  for (const CoefTerm& term : a_inner.terms())
    if (term_divergent(term, n_inner))
      throw TailDiverges(
          "nested_criterion_integral: inner moment integral diverges");
  if (a_inner.is_zero() || a_outer.is_zero())
    return IntegralVerdict::converged(0.0, 0.0);

  // Dominant inner term as t -> inf: A(t) ~ sum c t^p e^{q t} / (-q)^{n}.
  double q_star = -kInf;
  for (const CoefTerm& t : a_inner.terms())
    if (t.c > 0.0) q_star = std::max(q_star, t.q);
  double p_star = 0.0;
  for (const CoefTerm& t : a_inner.terms())
    if (t.c > 0.0 && t.q == q_star) p_star = std::max(p_star, t.p);

  // Per outer term, the integrand behaves like t^{n_o-1+p+lam p*} e^{(q+lam q*)t}.
  bool divergent = false;
  double worst_rate = -kInf, worst_power = -kInf;
  for (const CoefTerm& t : a_outer.terms()) {
    if (t.c <= 0.0) continue;
    const double rate = t.q + lambda_outer * q_star;
    const double power = n_outer - 1 + t.p + lambda_outer * p_star;
    const bool d = rate > 0.0 || (rate == 0.0 && power >= -1.0);
    if (d) {
      divergent = true;
      if (rate > worst_rate || (rate == worst_rate && power > worst_power)) {
        worst_rate = rate;
        worst_power = power;
      }
    }
  }

  const double inv_fact = 1.0 / factorial(n_outer - 1);
  auto f = [&](double t) {
    const double at = tail_kernel_value(a_inner, n_inner, t, cfg);
    return std::pow(t, n_outer - 1) * inv_fact * a_outer(t) *
           std::pow(at, lambda_outer);
  };

  if (divergent) {
    DivergenceEvidence ev;
    ev.q_star = worst_rate;
    ev.m_star = worst_power;
    SweepOutcome sweep = divergence_sweep(f, cfg);
    ev.partial_sums = std::move(sweep.log);
    if (!sweep.divergent)
      throw NumericSymbolicMismatch(
          "nested_criterion_integral: exact path divergent, numeric sweep converged");
    return IntegralVerdict::divergent(std::move(ev));
  }

  auto rem = [&](double H) {
    return nested_tail_bound(a_outer, n_outer, a_inner, n_inner, lambda_outer,
                             std::max(H, 1.0));
  };
  ImproperValue v = improper_value(f, rem, 2.0, cfg);
  return IntegralVerdict::converged(v.value, v.error);
}

double shifted_nested_integral(const CoefFn& a_outer, int n_outer,
                               const CoefFn& a_inner, int n_inner,
                               double lambda_outer, double T,
                               const QuadConfig& cfg) {
  check_order(n_outer);
  check_order(n_inner);
  cfg.validate();
  if (T < 0.0)
    throw std::invalid_argument("shifted_nested_integral: T must be >= 0");
  for (const CoefTerm& term : a_inner.terms())
    if (term_divergent(term, n_inner))
      throw TailDiverges("shifted_nested_integral: inner moment integral diverges");
  if (a_inner.is_zero() || a_outer.is_zero()) return 0.0;

  const double inv_fact = 1.0 / factorial(n_outer - 1);
  auto f = [&](double s) {
    const double as = tail_kernel_value(a_inner, n_inner, s, cfg);
    return std::pow(s - T, n_outer - 1) * inv_fact * a_outer(s) *
           std::pow(as, lambda_outer);
  };
  // (s-T)^{n-1} <= s^{n-1}, so the unshifted tail bound still covers the tail.
  auto rem = [&](double H) {
    return nested_tail_bound(a_outer, n_outer, a_inner, n_inner, lambda_outer,
                             std::max(H, 1.0));
  };
  if (!std::isfinite(rem(std::max(T + 1.0, 2.0))))
    throw TailDiverges("shifted_nested_integral: integral diverges");

  double H = std::max(T + 1.0, 2.0);
  double tail = rem(H);
  int grows = 0;
  while (tail > 0.5 * cfg.quad_tol) {
    H *= 2.0;
    tail = rem(H);
    if (++grows > 120)
      throw QuadratureFailure("shifted_nested_integral: tail bound does not shrink");
  }
  const double rough = integrate_adaptive_lenient(f, T, H, 1e-6, 1e-6, 600).value;
  const double budget = 0.5 * cfg.quad_tol * std::max(std::abs(rough), 1e-14);
  while (tail > budget) {
    H *= 2.0;
    tail = rem(H);
    if (++grows > 150)
      throw QuadratureFailure("shifted_nested_integral: tail bound does not shrink");
  }
  QuadratureResult gk =
      integrate_adaptive(f, T, H, budget, 0.5 * cfg.quad_tol, 4000);
  return gk.value;
}

}  // namespace oscil
