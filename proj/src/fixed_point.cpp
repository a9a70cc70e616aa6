#include "oscil/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>

#include "oscil/finite_difference.hpp"
#include "oscil/number_format.hpp"
#include "oscil/special_functions.hpp"

namespace oscil {

void FixedPointConfig::validate() const {
  if (grid_points < 100)
    throw std::invalid_argument("FixedPointConfig: grid_points must be >= 100");
  if (!(t_max > 0.0))
    throw std::invalid_argument("FixedPointConfig: t_max must be positive");
  if (!(grid_ratio >= 1.0))
    throw std::invalid_argument("FixedPointConfig: grid_ratio must be >= 1");
  if (max_iter < 1)
    throw std::invalid_argument("FixedPointConfig: max_iter must be >= 1");
  if (!(fp_tol > 0.0) || !(verify_tol > 0.0))
    throw std::invalid_argument("FixedPointConfig: tolerances must be positive");
}

double compute_P(const SystemSpec& spec, const QuadConfig& cfg) {
  IntegralVerdict v = nested_criterion_integral(spec.a1, spec.n1, spec.a2,
                                                spec.n2, spec.lambda1, cfg);
  if (v.is_divergent())
    throw DivergentP("compute_P: the nested integral diverges; the system is "
                     "not in the necessity regime");
  return v.value();
}

std::pair<double, double> choose_K1_T(const SystemSpec& spec, double P,
                                      const QuadConfig& qcfg,
                                      const FixedPointConfig& fcfg) {
  fcfg.validate();
  if (!(P > 0.0))
    throw DegenerateP("choose_K1_T: P must be positive (K1 undefined at P = 0)");
  const double ll = spec.lambda1 * spec.lambda2;
  if (!(ll > 1.0))
    throw HypothesisViolation("choose_K1_T: needs lambda1*lambda2 > 1");
  const double K1 = std::pow(P * spec.M, 1.0 / (1.0 - ll));
  const double prefac = std::pow(2.0, ll) * spec.M * std::pow(K1, ll);
  double T = 0.0;
  while (T <= fcfg.t_max) {
    const double G = prefac * shifted_nested_integral(spec.a1, spec.n1, spec.a2,
                                                      spec.n2, spec.lambda1, T,
                                                      qcfg);
    if (G < 0.9 * K1) return {K1, T};
    T = (T == 0.0) ? 1.0 : 2.0 * T;
  }
  throw NoAdmissibleT("choose_K1_T: scan exhausted t_max without G(T) < 0.9 K1");
}

Eigen::VectorXd make_grid(double T, double t_max, const FixedPointConfig& cfg) {
  const int n = cfg.grid_points;
  Eigen::VectorXd t(n);
  if (cfg.grid == GridSpacing::Uniform || cfg.grid_ratio == 1.0) {
    for (int i = 0; i < n; ++i)
      t[i] = T + (t_max - T) * static_cast<double>(i) / (n - 1);
  } else {
    // spacings h0 * rho^i, i = 0..n-2, with h_{last}/h_0 = grid_ratio
    const double rho = std::pow(cfg.grid_ratio, 1.0 / (n - 2));
    const double h0 = (t_max - T) * (rho - 1.0) / (std::pow(rho, n - 1) - 1.0);
    t[0] = T;
    double h = h0;
    for (int i = 1; i < n; ++i) {
      t[i] = t[i - 1] + h;
      h *= rho;
    }
  }
  t[n - 1] = t_max;
  return t;
}

namespace {

// Suffix trapezoidal moments S_j(i) = int_{t_i}^{t_last} r^j w(r) dr.
std::vector<Eigen::VectorXd> suffix_moments(const Eigen::VectorXd& t,
                                            const Eigen::VectorXd& w, int jmax) {
  const int n = static_cast<int>(t.size());
  std::vector<Eigen::VectorXd> S(jmax + 1, Eigen::VectorXd::Zero(n));
  for (int j = 0; j <= jmax; ++j) {
    for (int i = n - 2; i >= 0; --i) {
      const double gl = std::pow(t[i], j) * w[i];
      const double gr = std::pow(t[i + 1], j) * w[i + 1];
      S[j][i] = S[j][i + 1] + 0.5 * (gl + gr) * (t[i + 1] - t[i]);
    }
  }
  return S;
}

// (-1)^n / (n-1)! int_{t_i}^{t_last} (r - t_i)^{n-1} w(r) dr, for all i, via
// the binomial expansion of the kernel over the suffix moments.  Trapezoidal
// panels are linear in the integrand values, so expanding first changes
// nothing.
Eigen::VectorXd kernel_integral(const Eigen::VectorXd& t,
                                const Eigen::VectorXd& w, int n) {
  const int m = n - 1;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  const std::vector<Eigen::VectorXd> S = suffix_moments(t, w, m);
  Eigen::VectorXd out(t.size());
  for (int i = 0; i < t.size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j <= m; ++j)
      acc += binomial(m, j) * std::pow(-t[i], m - j) * S[j][i];
    out[i] = sign * acc / factorial(m);
  }
  return out;
}

}  // namespace

Eigen::VectorXd inner_map(const Eigen::VectorXd& x1, const SystemSpec& spec,
                          const Eigen::VectorXd& grid_t) {
  Eigen::VectorXd w(grid_t.size());
  for (int i = 0; i < grid_t.size(); ++i) w[i] = spec.f2(grid_t[i], x1[i]);
  return kernel_integral(grid_t, w, spec.n2);
}

Eigen::VectorXd apply_S1(const Eigen::VectorXd& x1, const SystemSpec& spec,
                         double K1, const Eigen::VectorXd& grid_t) {
  const Eigen::VectorXd x2 = inner_map(x1, spec, grid_t);
  Eigen::VectorXd w(grid_t.size());
  for (int i = 0; i < grid_t.size(); ++i) w[i] = spec.f1(grid_t[i], x2[i]);
  Eigen::VectorXd out = kernel_integral(grid_t, w, spec.n1);
  out.array() += K1;
  if (out.cwiseAbs().maxCoeff() > 2.0 * K1 * (1.0 + 1e-12))
    throw X1Escape("apply_S1: image left the ball of radius 2 K1; T too small");
  return out;
}

FixedPointResult iterate_from(const SystemSpec& spec, double K1, double T,
                              const FixedPointConfig& fcfg) {
  fcfg.validate();
  if (!(K1 > 0.0)) throw DegenerateP("iterate_from: K1 must be positive");

  FixedPointResult res;
  res.K1 = K1;
  res.T = T;

  // Grow the truncation horizon until both dropped tails are negligible
  // against fp_tol.  |x1| <= 2 K1 on the ball and (r-s)^{n-1} <= r^{n-1}
  // bound the inner tail; |x2| <= M (2 K1)^{lam2} A2 bounds the outer one.
  const double inner_scale = spec.M * std::pow(2.0 * K1, spec.lambda2);
  const double outer_scale =
      spec.M * std::pow(inner_scale, spec.lambda1);
  double t_max = std::max(fcfg.t_max, T + 1.0);
  for (int grows = 0;; ++grows) {
    res.tail_bound_x2 =
        spec.a2.is_zero() ? 0.0
                          : inner_scale * moment_tail_bound(spec.a2, spec.n2, t_max);
    res.tail_bound_x1 =
        (spec.a1.is_zero() || spec.a2.is_zero())
            ? 0.0
            : outer_scale * nested_tail_bound(spec.a1, spec.n1, spec.a2, spec.n2,
                                              spec.lambda1, std::max(t_max, 1.0));
    if (res.tail_bound_x2 <= fcfg.fp_tol / 10.0 &&
        res.tail_bound_x1 <= fcfg.fp_tol / 10.0)
      break;
    if (grows > 200 || t_max > 1e6)
      throw NoAdmissibleT("iterate_from: truncation horizon does not shrink the tails");
    t_max *= 1.25;
  }
  res.t_max = t_max;
  res.grid_t = make_grid(T, t_max, fcfg);

  Eigen::VectorXd x1 = Eigen::VectorXd::Constant(fcfg.grid_points, K1);
  for (int it = 1; it <= fcfg.max_iter; ++it) {
    Eigen::VectorXd next = apply_S1(x1, spec, K1, res.grid_t);
    res.final_delta = (next - x1).cwiseAbs().maxCoeff();
    res.delta_history.push_back(res.final_delta);
    res.iterations = it;
    x1 = std::move(next);
    if (res.final_delta <= fcfg.fp_tol) {
      res.converged = true;
      break;
    }
  }
  res.x1_grid = x1;
  res.x2_grid = inner_map(x1, spec, res.grid_t);
  const auto& dh = res.delta_history;
  for (std::size_t i = (dh.size() > 3) ? dh.size() - 3 : 1; i < dh.size(); ++i)
    res.delta_tail_monotone &= dh[i] <= dh[i - 1] * (1.0 + 1e-12);
  return res;
}

FixedPointResult iterate_to_fixed_point(const SystemSpec& spec,
                                        const QuadConfig& qcfg,
                                        const FixedPointConfig& fcfg) {
  CriteriaReport rep = classify_oscillation(spec, qcfg);
  if (rep.verdict != Verdict::NonOscillatingExists)
    throw HypothesisViolation(
        std::string("iterate_to_fixed_point: criteria verdict is ") +
        to_string(rep.verdict) + ", not NonOscillatingExists");
  if (rep.witness_k != 1)
    throw HypothesisViolation(
        "iterate_to_fixed_point: witness is k = 2; construct on the swapped "
        "system instead");
  const double P = compute_P(spec, qcfg);
  if (!(P > 0.0))
    throw DegenerateP("iterate_to_fixed_point: P = 0, K1 undefined");
  auto [K1, T] = choose_K1_T(spec, P, qcfg, fcfg);
  FixedPointResult res = iterate_from(spec, K1, T, fcfg);
  res.P = P;
  return res;
}

namespace {

// Max finite-difference residual |D^order x - f| over interior nodes.  The
// stencil window is strided so its spacing stays above a noise floor:
// differencing values stored with eps*|x| rounding amplifies that noise by
// ~1/h^order, so spacings below (eps*|x|/tol)^{1/order} would measure rounding
// instead of the solution.
double fd_residual_max(const Eigen::VectorXd& t, const Eigen::VectorXd& x,
                       int order, double tol,
                       const std::function<double(int)>& rhs_at) {
  const int n = static_cast<int>(t.size());
  const int win = order + 4;
  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  const double h_floor = std::pow(300.0 * eps * scale / tol, 1.0 / order);
  double worst = 0.0;
  Eigen::VectorXd nodes(win), vals(win);
  for (int i = 1; i + 1 < n; ++i) {
    int k = 1;
    while (i + k < n && t[i + k] - t[i] < h_floor) ++k;
    const int half = win / 2;
    const int lo = i - half * k;
    const int hi = i + (win - 1 - half) * k;
    if (lo < 0 || hi >= n) continue;
    for (int j = 0; j < win; ++j) {
      nodes[j] = t[lo + j * k];
      vals[j] = x[lo + j * k];
    }
    const Eigen::MatrixXd W = fd_weights(t[i], nodes, order);
    double d = 0.0;
    for (int j = 0; j < win; ++j) d += W(j, order) * vals[j];
    worst = std::max(worst, std::abs(d - rhs_at(i)));
  }
  return worst;
}

}  // namespace

VerificationReport verify_solution(const FixedPointResult& result,
                                   const SystemSpec& spec,
                                   const FixedPointConfig& cfg) {
  if (!result.converged)
    throw VerificationFailure("verify_solution: iteration did not converge");
  VerificationReport rep;
  const Eigen::VectorXd& t = result.grid_t;
  const int n = static_cast<int>(t.size());

  rep.ode_residual_1 =
      fd_residual_max(t, result.x1_grid, spec.n1, cfg.verify_tol, [&](int i) {
        return spec.f1(t[i], result.x2_grid[i]);
      });
  rep.ode_residual_2 =
      fd_residual_max(t, result.x2_grid, spec.n2, cfg.verify_tol, [&](int i) {
        return spec.f2(t[i], result.x1_grid[i]);
      });

  rep.limit_error_x1 = std::abs(result.x1_grid[n - 1] - result.K1);
  rep.limit_error_x2 = std::abs(result.x2_grid[n - 1]);
  rep.tail_bound_x1 = result.tail_bound_x1;
  rep.tail_bound_x2 = result.tail_bound_x2;

  for (int i = 0; i + 1 < n; ++i)
    if (result.x1_grid[i] * result.x1_grid[i + 1] < 0.0) ++rep.x1_sign_changes;

  rep.ok = true;
  auto fail = [&](const std::string& what) {
    rep.ok = false;
    rep.failures.push_back(what);
  };
  if (rep.ode_residual_1 > cfg.verify_tol) fail("ode_residual_1 above verify_tol");
  if (rep.ode_residual_2 > cfg.verify_tol) fail("ode_residual_2 above verify_tol");
  if (rep.limit_error_x1 > rep.tail_bound_x1 + 1e-12)
    fail("limit_error_x1 above the truncation bound");
  if (rep.limit_error_x2 > rep.tail_bound_x2 + 1e-12)
    fail("limit_error_x2 above the truncation bound");
  if (rep.x1_sign_changes != 0) fail("x1 changes sign on [T, t_max]");
  return rep;
}

InitialState initial_state_from(const FixedPointResult& result,
                                const SystemSpec& spec) {
  const Eigen::VectorXd& t = result.grid_t;
  const int n = static_cast<int>(t.size());
  const double T = t[0];

  // x_i^(j)(T) = (-1)^(n_i + j) int_T^{t_max} (s-T)^{n_i-1-j}/(n_i-1-j)! f_i ds
  auto derivs = [&](const Eigen::VectorXd& w, int order) {
    Eigen::VectorXd d(order);
    for (int j = 1; j < order; ++j) {
      const int m = order - 1 - j;
      double acc = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        const double gl = std::pow(t[i] - T, m) * w[i];
        const double gr = std::pow(t[i + 1] - T, m) * w[i + 1];
        acc += 0.5 * (gl + gr) * (t[i + 1] - t[i]);
      }
      const double sign = ((order + j) % 2 == 0) ? 1.0 : -1.0;
      d[j] = sign * acc / factorial(m);
    }
    return d;
  };

  Eigen::VectorXd w1(n), w2(n);
  for (int i = 0; i < n; ++i) {
    w1[i] = spec.f1(t[i], result.x2_grid[i]);
    w2[i] = spec.f2(t[i], result.x1_grid[i]);
  }

  InitialState init;
  init.t0 = T;
  init.x1_derivs = derivs(w1, spec.n1);
  init.x1_derivs[0] = result.x1_grid[0];
  init.x2_derivs = derivs(w2, spec.n2);
  init.x2_derivs[0] = result.x2_grid[0];
  return init;
}

void write_grid_csv(const FixedPointResult& result, std::ostream& os) {
  os << "t,x1,x2\n";
  for (int i = 0; i < result.grid_t.size(); ++i) {
    os << format_numeric(result.grid_t[i]) << ',' << format_numeric(result.x1_grid[i])
       << ',' << format_numeric(result.x2_grid[i]) << "\n";
  }
}

}  // namespace oscil
