#pragma once

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "oscil/finite_difference.hpp"
#include "oscil/ode_sim.hpp"

namespace oscil::testing {

/// Max over `n_points` interior dense-output points of the normalized ODE
/// residual  |D^{n_i} x_i - f_i| / (1 + |f_i|), with the finite-difference
/// spacing tied to the local accepted step so the check tracks the
/// integrator's own resolution.
inline double max_ode_residual(const Trajectory& traj, const SystemSpec& spec,
                               int n_points = 100) {
  const double t0 = traj.t0(), te = traj.t_last();
  double worst = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double t = t0 + (te - t0) * (k + 0.5) / n_points;
    // local step size of the segment containing t
    double h_loc = (te - t0) / std::max<std::size_t>(traj.segments.size(), 1);
    for (const auto& seg : traj.segments)
      if (t >= seg.t && t <= seg.t + seg.h) {
        h_loc = seg.h;
        break;
      }
    for (int comp = 0; comp < 2; ++comp) {
      const int order = comp == 0 ? traj.n1 : traj.n2;
      const int idx = comp == 0 ? 0 : traj.n1;
      const int w = order + 3;
      double h_fd = 0.3 * h_loc;
      if (t - (w / 2.0) * h_fd < t0 || t + (w / 2.0) * h_fd > te) continue;
      Eigen::VectorXd nodes(w), vals(w);
      for (int i = 0; i < w; ++i) {
        nodes[i] = t + (i - (w - 1) / 2.0) * h_fd;
        vals[i] = traj.eval_component(nodes[i], idx);
      }
      const Eigen::MatrixXd W = fd_weights(t, nodes, order);
      double d = 0.0;
      for (int i = 0; i < w; ++i) d += W(i, order) * vals[i];
      const Eigen::VectorXd u = traj.eval(t);
      const double f = comp == 0 ? spec.f1(t, u[traj.n1]) : spec.f2(t, u[0]);
      worst = std::max(worst, std::abs(d - f) / (1.0 + std::abs(f)));
    }
  }
  return worst;
}

/// Integrate, and when the solution escapes in finite time re-run on a window
/// truncated just before the escape.  Superlinear systems send generic data
/// to infinity in finite time; the completed pre-escape window is where a
/// classification is meaningful.
inline Trajectory integrate_pre_escape(const SystemSpec& spec,
                                       const InitialState& init, SimConfig cfg) {
  Trajectory traj = integrate(spec, init, cfg);
  for (int attempt = 0; attempt < 5 && traj.status == SimStatus::BlowUp;
       ++attempt) {
    cfg.t_end = (attempt == 0 ? 0.98 : 0.90) * traj.status_time;
    if (cfg.t_end <= init.t0) break;
    traj = integrate(spec, init, cfg);
  }
  return traj;
}

/// Minimal independent CSV reader: splits on commas and newlines, parses
/// numbers with strtod.
inline std::vector<std::vector<double>> parse_csv_numbers(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (header) {  // skip column names
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    char* end = nullptr;
    while (*p) {
      row.push_back(std::strtod(p, &end));
      p = (*end == ',') ? end + 1 : end;
      if (end == line.c_str() + line.size()) break;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace oscil::testing
