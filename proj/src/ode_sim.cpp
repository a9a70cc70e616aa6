#include "oscil/ode_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "oscil/errors.hpp"
#include "oscil/number_format.hpp"

namespace oscil {

void SimConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0) || !(zero_refine_tol > 0.0))
    throw std::invalid_argument("SimConfig: tolerances must be positive");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw std::invalid_argument("SimConfig: tail_fraction must lie in (0, 1]");
  if (osc_min_zeros < 1)
    throw std::invalid_argument("SimConfig: osc_min_zeros must be >= 1");
  if (!(proper_eps > 0.0))
    throw std::invalid_argument("SimConfig: proper_eps must be positive");
}

const char* to_string(SimStatus s) {
  switch (s) {
    case SimStatus::Completed: return "Completed";
    case SimStatus::BlowUp: return "BlowUp";
    case SimStatus::StepFailure: return "StepFailure";
  }
  return "UnknownStatus";
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Oscillating: return "Oscillating";
    case Classification::WeaklyOscillating: return "WeaklyOscillating";
    case Classification::NonOscillating: return "NonOscillating";
    case Classification::Indeterminate: return "Indeterminate";
    case Classification::Improper: return "Improper";
  }
  return "UnknownClassification";
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat, the embedded 4th-order error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights for the quartic continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

constexpr double kBlowUpNorm = 1e12;
constexpr long kMaxSteps = 5'000'000;

double initial_step(const FirstOrderSystem& f, double t0,
                    const Eigen::VectorXd& u0, const Eigen::VectorXd& f0,
                    double span, double rtol, double atol) {
  const double d0 = u0.cwiseAbs().maxCoeff();
  const double d1n = f0.cwiseAbs().maxCoeff();
  double h = (d1n > 1e-12) ? 0.01 * std::max(d0, atol) / d1n : 1e-6 * span;
  h = std::min(h, 0.1 * span);
  // one Euler probe to guard against underestimating the curvature
  Eigen::VectorXd u1 = u0 + h * f0;
  Eigen::VectorXd f1(u0.size());
  f(t0 + h, u1, f1);
  const double d2 = (f1 - f0).cwiseAbs().maxCoeff() / std::max(h, 1e-300);
  if (d2 > 1e-12) h = std::min(h, std::pow(0.01 * (rtol + atol) / d2, 1.0 / 3.0));
  return std::max(h, 1e-12 * std::max(1.0, std::abs(t0)));
}

// Evaluate the quartic interpolant of one segment at parameter theta in [0,1].
Eigen::VectorXd dense_eval(const Trajectory::DenseSegment& s, double theta) {
  const double th1 = 1.0 - theta;
  return s.cont.col(0) +
         theta * (s.cont.col(1) +
                  th1 * (s.cont.col(2) +
                         theta * (s.cont.col(3) + th1 * s.cont.col(4))));
}

double dense_eval_component(const Trajectory::DenseSegment& s, double theta,
                            int i) {
  const double th1 = 1.0 - theta;
  return s.cont(i, 0) +
         theta * (s.cont(i, 1) +
                  th1 * (s.cont(i, 2) + theta * (s.cont(i, 3) + th1 * s.cont(i, 4))));
}

// Locate zeros of component `index` inside the segment by sampling the
// interpolant and bisecting each strict sign change to width <= refine_tol.
void locate_zeros(const Trajectory::DenseSegment& s, int index,
                  double refine_tol, std::vector<double>& zeros) {
  constexpr int kSamples = 8;
  double th_prev = 0.0;
  double v_prev = dense_eval_component(s, 0.0, index);
  for (int j = 1; j <= kSamples; ++j) {
    const double th = static_cast<double>(j) / kSamples;
    const double v = dense_eval_component(s, th, index);
    if (v_prev * v < 0.0) {
      double lo = th_prev, hi = th, vlo = v_prev;
      while ((hi - lo) * s.h > refine_tol) {
        const double mid = 0.5 * (lo + hi);
        const double vm = dense_eval_component(s, mid, index);
        if (vlo * vm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          vlo = vm;
        }
      }
      const double t_zero = s.t + 0.5 * (lo + hi) * s.h;
      if (zeros.empty() || t_zero > zeros.back() + refine_tol)
        zeros.push_back(t_zero);
    }
    th_prev = th;
    v_prev = v;
  }
}

}  // namespace

Eigen::VectorXd Trajectory::eval(double t) const {
  if (segments.empty()) return states.front();
  // last segment with start <= t
  auto it = std::upper_bound(
      segments.begin(), segments.end(), t,
      [](double v, const DenseSegment& s) { return v < s.t; });
  if (it != segments.begin()) --it;
  const double theta = std::clamp((t - it->t) / it->h, 0.0, 1.0);
  return dense_eval(*it, theta);
}

double Trajectory::eval_component(double t, int index) const {
  return eval(t)[index];
}

Trajectory integrate(const SystemSpec& spec, const InitialState& init,
                     const SimConfig& cfg) {
  cfg.validate();
  if (init.x1_derivs.size() != spec.n1 || init.x2_derivs.size() != spec.n2)
    throw InvalidInit("integrate: initial state dimensions do not match the orders");
  if (!(cfg.t_end > init.t0))
    throw InvalidInit("integrate: t_end must exceed t0");

  const FirstOrderSystem f = to_first_order(spec);
  const int dim = f.dim();

  Trajectory traj;
  traj.n1 = spec.n1;
  traj.n2 = spec.n2;

  Eigen::VectorXd u(dim);
  u.head(spec.n1) = init.x1_derivs;
  u.tail(spec.n2) = init.x2_derivs;

  double t = init.t0;
  traj.times.push_back(t);
  traj.states.push_back(u);

  Eigen::VectorXd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  Eigen::VectorXd utmp(dim), unew(dim), err(dim);
  f(t, u, k1);

  const double span = cfg.t_end - init.t0;
  double h = initial_step(f, t, u, k1, span, cfg.rtol, cfg.atol);

  traj.status = SimStatus::Completed;
  long n_steps = 0;
  bool rejected = false;

  while (t < cfg.t_end - 1e-14 * std::max(1.0, std::abs(cfg.t_end))) {
    if (++n_steps > kMaxSteps) {
      traj.status = SimStatus::StepFailure;
      traj.status_time = t;
      break;
    }
    h = std::min(h, cfg.t_end - t);
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      traj.status = SimStatus::StepFailure;
      traj.status_time = t;
      break;
    }

    utmp = u + h * (a21 * k1);
    f(t + c2 * h, utmp, k2);
    utmp = u + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, utmp, k3);
    utmp = u + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, utmp, k4);
    utmp = u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, utmp, k5);
    utmp = u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, utmp, k6);
    unew = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, unew, k7);  // FSAL
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double sc =
          cfg.atol + cfg.rtol * std::max(std::abs(u[i]), std::abs(unew[i]));
      const double r = err[i] / sc;
      norm2 += r * r;
    }
    const double err_norm = std::sqrt(norm2 / dim);

    if (!std::isfinite(err_norm) || !unew.allFinite()) {
      // treat a non-finite stage as a blow-up inside this step
      traj.status = SimStatus::BlowUp;
      traj.status_time = t + h;
      break;
    }

    if (err_norm <= 1.0) {
      Trajectory::DenseSegment seg;
      seg.t = t;
      seg.h = h;
      seg.cont.resize(dim, 5);
      seg.cont.col(0) = u;
      seg.cont.col(1) = unew - u;
      seg.cont.col(2) = h * k1 - seg.cont.col(1);
      seg.cont.col(3) = seg.cont.col(1) - h * k7 - seg.cont.col(2);
      seg.cont.col(4) =
          h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      locate_zeros(seg, 0, cfg.zero_refine_tol, traj.zeros1);
      locate_zeros(seg, spec.n1, cfg.zero_refine_tol, traj.zeros2);
      traj.segments.push_back(std::move(seg));

      t += h;
      u = unew;
      k1 = k7;
      traj.times.push_back(t);
      traj.states.push_back(u);

      if (u.cwiseAbs().maxCoeff() > kBlowUpNorm) {
        traj.status = SimStatus::BlowUp;
        traj.status_time = t;
        break;
      }
      double fac = 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2);
      fac = std::min(rejected ? 1.0 : 5.0, std::max(0.2, fac));
      h *= fac;
      rejected = false;
    } else {
      h *= std::min(1.0, std::max(0.1, 0.9 * std::pow(err_norm, -0.2)));
      rejected = true;
    }
  }

  traj.status_time = (traj.status == SimStatus::Completed) ? t : traj.status_time;
  traj.classification = (traj.status == SimStatus::Completed)
                            ? classify_trajectory(traj, cfg)
                            : Classification::Indeterminate;
  return traj;
}

bool is_proper(const Trajectory& traj, const SimConfig& cfg) {
  const double t0 = traj.t0(), te = traj.t_last();
  const double w0 = te - cfg.tail_fraction * (te - t0);
  double m = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < w0) continue;
    m = std::max(m, std::abs(traj.states[i][0]) +
                        std::abs(traj.states[i][traj.n1]));
  }
  return m > cfg.proper_eps;
}

Classification classify_trajectory(const Trajectory& traj, const SimConfig& cfg) {
  if (traj.status != SimStatus::Completed)
    throw IncompleteTrajectory("classify_trajectory: trajectory did not complete");
  if (!is_proper(traj, cfg)) return Classification::Improper;

  const double t0 = traj.t0(), te = traj.t_last();
  const double w0 = te - cfg.tail_fraction * (te - t0);
  auto count_in_window = [&](const std::vector<double>& zs) {
    int n = 0;
    for (double z : zs)
      if (z >= w0) ++n;
    return n;
  };
  const int z1 = count_in_window(traj.zeros1);
  const int z2 = count_in_window(traj.zeros2);

  if (z1 >= cfg.osc_min_zeros && z2 >= cfg.osc_min_zeros)
    return Classification::Oscillating;
  if ((z1 >= cfg.osc_min_zeros && z2 == 0) || (z2 >= cfg.osc_min_zeros && z1 == 0))
    return Classification::WeaklyOscillating;
  if (z1 == 0 && z2 == 0) return Classification::NonOscillating;
  return Classification::Indeterminate;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,x1";
  for (int i = 1; i < traj.n1; ++i) os << ",x1_d" << i;
  os << ",x2";
  for (int i = 1; i < traj.n2; ++i) os << ",x2_d" << i;
  os << "\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    os << format_numeric(traj.times[r]);
    for (int i = 0; i < traj.n1 + traj.n2; ++i)
      os << ',' << format_numeric(traj.states[r][i]);
    os << "\n";
  }
}

}  // namespace oscil
