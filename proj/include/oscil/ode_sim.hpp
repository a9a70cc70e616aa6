#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "oscil/system_spec.hpp"

namespace oscil {

/// Initial data at t0: the first n_i derivatives of each component.
struct InitialState {
  double t0 = 0.0;
  Eigen::VectorXd x1_derivs;  ///< x1, x1', ..., x1^(n1-1)
  Eigen::VectorXd x2_derivs;  ///< x2, x2', ..., x2^(n2-1)
};

struct SimConfig {
  double t_end = 50.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  double zero_refine_tol = 1e-10;  ///< width to which zero brackets are refined
  double tail_fraction = 0.5;      ///< portion of [t0, t_end] used for classification
  int osc_min_zeros = 2;           ///< sign changes needed to call a component oscillating
  double proper_eps = 1e-12;       ///< threshold for the proper-solution test

  void validate() const;
};

enum class SimStatus { Completed, BlowUp, StepFailure };
enum class Classification {
  Oscillating,
  WeaklyOscillating,
  NonOscillating,
  Indeterminate,
  Improper,
};
const char* to_string(SimStatus s);
const char* to_string(Classification c);

/// First-order reduction u' = F(t, u) of the coupled system, with state
/// u = (x1, x1', ..., x1^(n1-1), x2, x2', ..., x2^(n2-1)).
class FirstOrderSystem {
 public:
  explicit FirstOrderSystem(SystemSpec spec) : spec_(std::move(spec)) {}

  int dim() const noexcept { return spec_.n1 + spec_.n2; }
  const SystemSpec& spec() const noexcept { return spec_; }

  void operator()(double t, const Eigen::VectorXd& u, Eigen::VectorXd& du) const {
    const int n1 = spec_.n1, n2 = spec_.n2;
    for (int i = 0; i + 1 < n1; ++i) du[i] = u[i + 1];
    du[n1 - 1] = spec_.f1(t, u[n1]);
    for (int i = 0; i + 1 < n2; ++i) du[n1 + i] = u[n1 + i + 1];
    du[n1 + n2 - 1] = spec_.f2(t, u[0]);
  }

 private:
  SystemSpec spec_;
};

inline FirstOrderSystem to_first_order(SystemSpec spec) {
  return FirstOrderSystem(std::move(spec));
}

/// Dense numerical solution with located zeros of x1 and x2.
///
/// `times`/`states` hold every accepted step (including t0); `eval` gives the
/// continuous extension on [t0, t_last] from the per-step interpolants.
class Trajectory {
 public:
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::vector<double> zeros1, zeros2;
  SimStatus status = SimStatus::Completed;
  double status_time = 0.0;
  Classification classification = Classification::Indeterminate;
  int n1 = 1, n2 = 1;

  double t0() const { return times.front(); }
  double t_last() const { return times.back(); }

  /// Continuous extension at any t in [t0, t_last].
  Eigen::VectorXd eval(double t) const;
  double eval_component(double t, int index) const;

  // one quartic interpolant per accepted step, filled by integrate()
  struct DenseSegment {
    double t, h;
    Eigen::MatrixXd cont;  // dim x 5 coefficient columns
  };
  std::vector<DenseSegment> segments;
};

/// Adaptive embedded Runge-Kutta 5(4) integration with dense output and
/// zero location by sign-change bracketing.  Integration failures are
/// reported through Trajectory::status, not exceptions; only dimension
/// mismatches throw (InvalidInit).  Each call owns its state, so batches of
/// integrations may run concurrently.
Trajectory integrate(const SystemSpec& spec, const InitialState& init,
                     const SimConfig& cfg);

/// Proper-solution test: max over tail-window samples of |x1|+|x2| exceeds
/// proper_eps.
bool is_proper(const Trajectory& traj, const SimConfig& cfg);

/// Finite-window classification over the tail window
/// [t_end - tail_fraction*(t_end - t0), t_end].  Requires a completed
/// trajectory (IncompleteTrajectory otherwise).
Classification classify_trajectory(const Trajectory& traj, const SimConfig& cfg);

/// CSV export: header t,x1,...,x1_d{n1-1},x2,...,x2_d{n2-1}, one row per
/// accepted step, '.' decimal separator, '\n' line endings.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace oscil
