#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "oscil/criteria.hpp"
#include "oscil/ode_sim.hpp"

namespace oscil {

enum class GridSpacing { Uniform, Geometric };

struct FixedPointConfig {
  int grid_points = 4000;              ///< >= 100
  double t_max = 20.0;                 ///< truncation horizon; auto-grown until tails fit
  GridSpacing grid = GridSpacing::Geometric;
  double grid_ratio = 100.0;           ///< last/first spacing in geometric mode
  int max_iter = 200;
  double fp_tol = 1e-8;                ///< sup-norm convergence tolerance
  double verify_tol = 1e-5;            ///< ODE-residual tolerance

  void validate() const;
};

/// Constructed non-oscillating solution: grid functions on [T, t_max], the
/// constants of the construction, and iteration diagnostics.
struct FixedPointResult {
  double P = 0.0;
  double K1 = 0.0;
  double T = 0.0;
  double t_max = 0.0;
  Eigen::VectorXd grid_t;
  Eigen::VectorXd x1_grid;
  Eigen::VectorXd x2_grid;
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  std::vector<double> delta_history;
  /// existence does not promise monotone contraction, so this is monitored
  /// rather than enforced: sup-change nonincreasing over the last 3 iterations
  bool delta_tail_monotone = true;
  double tail_bound_x2 = 0.0;  ///< truncation bound on the inner map
  double tail_bound_x1 = 0.0;  ///< truncation bound on the outer map
};

struct VerificationReport {
  double ode_residual_1 = 0.0;  ///< max |D^{n1} x1 - f1(t, x2)| at interior nodes
  double ode_residual_2 = 0.0;
  double limit_error_x1 = 0.0;  ///< |x1(t_max) - K1|
  double limit_error_x2 = 0.0;  ///< |x2(t_max)|
  double tail_bound_x1 = 0.0;
  double tail_bound_x2 = 0.0;
  int x1_sign_changes = 0;
  bool ok = false;
  std::vector<std::string> failures;
};

/// The convergent value of the nested criterion integral with outer
/// (a1, n1, lambda1) and inner (a2, n2).  Throws DivergentP when it diverges.
/// A zero value (empty a1) leaves K1 undefined; callers must treat it as
/// degenerate.
double compute_P(const SystemSpec& spec, const QuadConfig& cfg);

/// K1 = (P M)^{1/(1 - lambda1 lambda2)}; T is the first of 0, 1, 2, 4, ...
/// with  2^{lambda1 lambda2} M K1^{lambda1 lambda2} *
///       int_T^inf (s-T)^{n1-1}/(n1-1)! a1(s) A2(s)^{lambda1} ds  < 0.9 K1.
/// Throws DegenerateP when P <= 0 and NoAdmissibleT when the scan passes t_max.
std::pair<double, double> choose_K1_T(const SystemSpec& spec, double P,
                                      const QuadConfig& qcfg,
                                      const FixedPointConfig& fcfg);

/// Grid over [T, t_max]: uniform or geometrically graded with the requested
/// last/first spacing ratio (finer near T, where the integrands are largest).
Eigen::VectorXd make_grid(double T, double t_max, const FixedPointConfig& cfg);

/// Inner map on the grid:
///   x2(s) = (-1)^{n2} int_s^{t_max} (r-s)^{n2-1}/(n2-1)! f2(r, x1(r)) dr.
Eigen::VectorXd inner_map(const Eigen::VectorXd& x1, const SystemSpec& spec,
                          const Eigen::VectorXd& grid_t);

/// One application of the integral operator:
///   (S1 x1)(t) = K1 + (-1)^{n1} int_t^{t_max} (s-t)^{n1-1}/(n1-1)! f1(s, x2(s)) ds
/// with x2 from inner_map.  Throws X1Escape when the image leaves the ball
/// of radius 2 K1.
Eigen::VectorXd apply_S1(const Eigen::VectorXd& x1, const SystemSpec& spec,
                         double K1, const Eigen::VectorXd& grid_t);

/// Picard iteration of S1 from x1 == K1 on a fresh grid.  t_max is grown
/// beyond cfg.t_max until both truncation tail bounds are <= fp_tol/10.
/// Nonconvergence is reported through the result, not thrown.
FixedPointResult iterate_from(const SystemSpec& spec, double K1, double T,
                              const FixedPointConfig& fcfg);

/// Full necessity pipeline: gate on the criteria verdict (HypothesisViolation
/// when it is not NonOscillatingExists with witness k = 1), then P, K1, T and
/// the iteration.
FixedPointResult iterate_to_fixed_point(const SystemSpec& spec,
                                        const QuadConfig& qcfg,
                                        const FixedPointConfig& fcfg);

/// Residual checks on a converged result: finite-difference ODE residuals at
/// interior nodes, limit errors against the truncation bounds, and the
/// zero-count of x1.
VerificationReport verify_solution(const FixedPointResult& result,
                                   const SystemSpec& spec,
                                   const FixedPointConfig& cfg);

/// Initial data at T for a corroborating simulation, with derivatives read
/// off the grid through the integral representation of the solution.
InitialState initial_state_from(const FixedPointResult& result,
                                const SystemSpec& spec);

/// CSV export with columns t,x1,x2.
void write_grid_csv(const FixedPointResult& result, std::ostream& os);

}  // namespace oscil
