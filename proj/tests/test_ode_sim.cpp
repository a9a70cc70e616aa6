#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oscil/errors.hpp"
#include "oscil/ode_sim.hpp"
#include "test_helpers.hpp"

using namespace oscil;

namespace {

SystemSpec harmonic_pair() {
  // x1' = x2, x2' = -x1:  x1 = cos t, x2 = -sin t from (1, 0)
  SystemSpec s;
  s.n1 = s.n2 = 1;
  s.lambda1 = s.lambda2 = 1.0;
  s.a1 = CoefFn{{1, 0, 0}};
  s.a2 = CoefFn{{1, 0, 0}};
  return s;
}

SystemSpec example_case1() {
  SystemSpec s;
  s.n1 = s.n2 = 2;
  s.lambda1 = 2.0;
  s.lambda2 = 3.0;
  s.a1 = CoefFn{{1, 2, 0}};
  s.a2 = CoefFn{{1, 4, 0}};
  return s;
}

InitialState init2(double a, double b, double c, double d, double t0 = 0.0) {
  InitialState i;
  i.t0 = t0;
  i.x1_derivs = Eigen::Vector2d(a, b);
  i.x2_derivs = Eigen::Vector2d(c, d);
  return i;
}

InitialState init1(double a, double b, double t0 = 0.0) {
  InitialState i;
  i.t0 = t0;
  i.x1_derivs = Eigen::VectorXd::Constant(1, a);
  i.x2_derivs = Eigen::VectorXd::Constant(1, b);
  return i;
}

}  // namespace

TEST_CASE("first-order reduction wiring") {
  {
    const FirstOrderSystem f = to_first_order(harmonic_pair());
    Eigen::VectorXd u(2), du(2);
    u << 0.0, 1.0;
    f(0.0, u, du);
    CHECK(du[0] == doctest::Approx(1.0));
    CHECK(du[1] == doctest::Approx(0.0));
  }
  {
    const FirstOrderSystem f = to_first_order(example_case1());
    Eigen::VectorXd u(4), du(4);
    u << 1.0, 0.0, 1.0, 0.0;
    f(1.0, u, du);
    CHECK(du[0] == doctest::Approx(0.0));
    CHECK(du[1] == doctest::Approx(1.0));   // a1(1) |1|^2 sign 1
    CHECK(du[2] == doctest::Approx(0.0));
    CHECK(du[3] == doctest::Approx(-1.0));  // -a2(1) |1|^3 sign 1
    u.setZero();
    f(3.0, u, du);
    CHECK(du.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("harmonic pair: zeros sit on the sine/cosine lattice") {
  SimConfig cfg;
  cfg.t_end = 2.0 * M_PI + 0.05;
  const Trajectory traj = integrate(harmonic_pair(), init1(1.0, 0.0), cfg);
  REQUIRE(traj.status == SimStatus::Completed);

  REQUIRE(traj.zeros1.size() == 2);
  CHECK(std::abs(traj.zeros1[0] - M_PI / 2) <= 10 * cfg.zero_refine_tol);
  CHECK(std::abs(traj.zeros1[1] - 3 * M_PI / 2) <= 10 * cfg.zero_refine_tol);
  REQUIRE(traj.zeros2.size() == 2);
  CHECK(std::abs(traj.zeros2[0] - M_PI) <= 10 * cfg.zero_refine_tol);
  CHECK(std::abs(traj.zeros2[1] - 2 * M_PI) <= 10 * cfg.zero_refine_tol);

  // dense output against the exact solution
  for (double t = 0.3; t < cfg.t_end; t += 0.9) {
    CHECK(traj.eval_component(t, 0) == doctest::Approx(std::cos(t)).epsilon(1e-8));
    CHECK(traj.eval_component(t, 1) == doctest::Approx(-std::sin(t)).epsilon(1e-8));
  }
}

TEST_CASE("zero right-hand side extends the initial polynomial") {
  SystemSpec s;
  s.n1 = s.n2 = 2;
  s.a1 = CoefFn{};
  s.a2 = CoefFn{};
  SimConfig cfg;
  cfg.t_end = 5.0;
  const Trajectory traj = integrate(s, init2(1.0, 2.0, 4.0, 0.0), cfg);
  REQUIRE(traj.status == SimStatus::Completed);
  for (double t : {0.5, 2.0, 4.5}) {
    CHECK(traj.eval_component(t, 0) == doctest::Approx(1.0 + 2.0 * t).epsilon(1e-12));
    CHECK(traj.eval_component(t, 2) == doctest::Approx(4.0).epsilon(1e-12));
  }

  // constant first derivatives: x1 stays at K
  const Trajectory flat = integrate(s, init2(7.0, 0.0, 0.0, 0.0), cfg);
  CHECK(flat.eval_component(4.0, 0) == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(flat.classification == Classification::NonOscillating);
}

TEST_CASE("example case 1: finite-time escape, matching a tight-tolerance reference") {
  // the superlinear coupling sends this solution to infinity near t = 2.41;
  // the run must surface that as a status and agree with a reference run on
  // both the escape time and the zeros collected on the way
  SimConfig cfg;
  cfg.t_end = 10.0;
  const Trajectory traj = integrate(example_case1(), init2(1, 0, 1, 0), cfg);
  REQUIRE(traj.status == SimStatus::BlowUp);
  CHECK(traj.status_time == doctest::Approx(2.413).epsilon(1e-2));

  SimConfig ref = cfg;
  ref.rtol = 1e-12;
  ref.atol = 1e-14;
  const Trajectory gold = integrate(example_case1(), init2(1, 0, 1, 0), ref);
  REQUIRE(gold.status == SimStatus::BlowUp);
  CHECK(traj.zeros1.size() == gold.zeros1.size());
  CHECK(traj.zeros2.size() == gold.zeros2.size());
  for (std::size_t i = 0; i < std::min(traj.zeros1.size(), gold.zeros1.size()); ++i)
    CHECK(std::abs(traj.zeros1[i] - gold.zeros1[i]) < 1e-6);

  // classification on the maximal completed window
  const Trajectory pre =
      testing::integrate_pre_escape(example_case1(), init2(1, 0, 1, 0), cfg);
  REQUIRE(pre.status == SimStatus::Completed);
  CHECK(pre.classification == Classification::Oscillating);
}

TEST_CASE("classification of the standard shapes") {
  SimConfig cfg;
  cfg.t_end = 8.0 * M_PI;
  const Trajectory osc = integrate(harmonic_pair(), init1(1.0, 0.0), cfg);
  CHECK(osc.classification == Classification::Oscillating);
  CHECK(is_proper(osc, cfg));

  // trivial solution: zero data, zero field
  SystemSpec s = example_case1();
  cfg.t_end = 5.0;
  const Trajectory trivial = integrate(s, init2(0, 0, 0, 0), cfg);
  CHECK(trivial.classification == Classification::Improper);
  CHECK_FALSE(is_proper(trivial, cfg));
}

TEST_CASE("proper-solution test on a decaying synthetic trajectory") {
  Trajectory traj;
  traj.n1 = traj.n2 = 1;
  for (double t = 0.0; t <= 20.0; t += 0.1) {
    traj.times.push_back(t);
    Eigen::VectorXd u(2);
    u << std::exp(-t) * 3.0, 0.0;
    traj.states.push_back(u);
  }
  SimConfig cfg;
  cfg.proper_eps = 1e-12;
  CHECK(is_proper(traj, cfg));  // sup tail ~ 3 e^{-20} > 1e-12
  cfg.proper_eps = 1e-3;
  CHECK_FALSE(is_proper(traj, cfg));
}

TEST_CASE("weakly oscillating and indeterminate windows") {
  Trajectory traj;
  traj.n1 = traj.n2 = 1;
  for (double t = 0.0; t <= 10.0; t += 0.05) {
    traj.times.push_back(t);
    Eigen::VectorXd u(2);
    u << std::sin(t), 2.0 + std::cos(t) * 0.1;
    traj.states.push_back(u);
  }
  for (double z = M_PI; z < 10.0; z += M_PI) traj.zeros1.push_back(z);
  SimConfig cfg;
  CHECK(classify_trajectory(traj, cfg) == Classification::WeaklyOscillating);

  // one zero of x2 in the window is neither "none" nor "oscillating"
  traj.zeros2.push_back(9.0);
  CHECK(classify_trajectory(traj, cfg) == Classification::Indeterminate);
}

TEST_CASE("sublinear power laws integrate despite the unbounded derivative at 0") {
  SystemSpec s;
  s.n1 = s.n2 = 1;
  s.lambda1 = s.lambda2 = 0.5;
  s.a1 = CoefFn{{1, 0, 0}};
  s.a2 = CoefFn{{1, 0, 0}};
  SimConfig cfg;
  cfg.t_end = 30.0;
  const Trajectory traj = integrate(s, init1(1.0, 0.0), cfg);
  REQUIRE(traj.status == SimStatus::Completed);
  CHECK(traj.classification == Classification::Oscillating);
  CHECK(traj.zeros1.size() >= 5);
}

TEST_CASE("blow-up is a status, not an error") {
  // x1' = e^t |x2| sign x2 with x2 frozen at 1 grows like e^t
  SystemSpec s;
  s.n1 = s.n2 = 1;
  s.lambda1 = s.lambda2 = 1.0;
  s.a1 = CoefFn{{1, 0, 1}};
  s.a2 = CoefFn{};
  SimConfig cfg;
  cfg.t_end = 40.0;
  const Trajectory traj = integrate(s, init1(0.0, 1.0), cfg);
  CHECK(traj.status == SimStatus::BlowUp);
  CHECK(traj.status_time < 31.0);  // e^t passes 1e12 before t = 28.7
  CHECK(traj.classification == Classification::Indeterminate);
  CHECK_THROWS_AS(classify_trajectory(traj, cfg), IncompleteTrajectory);
}

TEST_CASE("dimension mismatches are rejected") {
  SimConfig cfg;
  InitialState bad;
  bad.x1_derivs = Eigen::VectorXd::Zero(1);
  bad.x2_derivs = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(integrate(example_case1(), bad, cfg), InvalidInit);
}

TEST_CASE("property: dense-output ODE residuals stay small") {
  SimConfig cfg;
  cfg.t_end = 2.0 * M_PI;
  const Trajectory h = integrate(harmonic_pair(), init1(1.0, 0.0), cfg);
  CHECK(testing::max_ode_residual(h, harmonic_pair()) < 1e-4);

  cfg.t_end = 2.2;  // inside the window where the case-1 solution still exists
  const Trajectory e1 = integrate(example_case1(), init2(1, 0, 1, 0), cfg);
  REQUIRE(e1.status == SimStatus::Completed);
  CHECK(testing::max_ode_residual(e1, example_case1()) < 5e-3);
}

TEST_CASE("property: recorded zeros are bracketed by a sign change") {
  SimConfig cfg;
  cfg.t_end = 8.0 * M_PI;
  cfg.zero_refine_tol = 1e-9;
  const Trajectory traj = integrate(harmonic_pair(), init1(1.0, 0.0), cfg);
  REQUIRE(traj.zeros1.size() >= 4);
  for (double z : traj.zeros1) {
    const double before = traj.eval_component(z - cfg.zero_refine_tol, 0);
    const double after = traj.eval_component(z + cfg.zero_refine_tol, 0);
    CHECK(before * after < 0.0);
  }
}

TEST_CASE("property: halving the tolerances barely moves the zeros") {
  SimConfig cfg;
  cfg.t_end = 2.0 * M_PI + 0.05;
  const Trajectory a = integrate(harmonic_pair(), init1(1.0, 0.0), cfg);
  SimConfig half = cfg;
  half.rtol /= 2.0;
  half.atol /= 2.0;
  const Trajectory b = integrate(harmonic_pair(), init1(1.0, 0.0), half);
  REQUIRE(a.zeros1.size() == b.zeros1.size());
  for (std::size_t i = 0; i < a.zeros1.size(); ++i)
    CHECK(std::abs(a.zeros1[i] - b.zeros1[i]) <= 10.0 * cfg.zero_refine_tol);
}

TEST_CASE("property: no falsification of an all-oscillate verdict by simulation") {
  // small in-process version of the acceptance sweep
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SimConfig cfg;
  cfg.t_end = 10.0;
  for (int k = 0; k < 5; ++k) {
    InitialState init = init2(u(rng), u(rng), u(rng), u(rng));
    if (init.x1_derivs.cwiseAbs().maxCoeff() < 0.05) init.x1_derivs[0] += 0.5;
    const Trajectory traj =
        testing::integrate_pre_escape(example_case1(), init, cfg);
    if (traj.status != SimStatus::Completed) continue;
    CHECK(traj.classification != Classification::NonOscillating);
    CHECK(traj.classification != Classification::WeaklyOscillating);
  }
}

TEST_CASE("CSV schema and exact round-trip") {
  SystemSpec s;
  s.n1 = 2;
  s.n2 = 3;
  s.a1 = CoefFn{{1, 0, -1}};
  s.a2 = CoefFn{{1, 0, -1}};
  s.lambda1 = 2.0;
  s.lambda2 = 3.0;
  InitialState init;
  init.x1_derivs = Eigen::Vector2d(1.0, 0.5);
  init.x2_derivs = Eigen::Vector3d(0.25, -1.0, 0.125);
  SimConfig cfg;
  cfg.t_end = 1.0;
  const Trajectory traj = integrate(s, init, cfg);

  std::ostringstream os;
  write_trajectory_csv(traj, os);
  const std::string text = os.str();
  CHECK(text.rfind("t,x1,x1_d1,x2,x2_d1,x2_d2\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);

  const auto rows = testing::parse_csv_numbers(text);
  REQUIRE(rows.size() == traj.times.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    REQUIRE(rows[r].size() == 6);
    CHECK(rows[r][0] == traj.times[r]);  // %.17g round-trips exactly
    for (int c = 0; c < 5; ++c) CHECK(rows[r][c + 1] == traj.states[r][c]);
  }
}
