#include "safecct/dynamics.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace safecct {

Vec coupled_rhs(const StageModel& stage, const Vec& x) {
  const int m = stage.size();
  Vec dx(2 * m);
  dx.head(m) = x.tail(m);
  dx.tail(m) = stage.p() - stage.d().cwiseProduct(x.tail(m));
  const Mat& K = stage.K();
  for (const Edge& e : stage.edges()) {
    const double f = K(e.i, e.j) * std::sin(x[e.i] - x[e.j]);
    dx[m + e.i] -= f;
    dx[m + e.j] += f;
  }
  return dx;
}

Vec coupled_rhs(const StageModel& stage, const GridState& state) { return coupled_rhs(stage, state.stacked()); }

MachineModel make_machine(const StageModel& stage, const Bounds& bounds, int i) {
  if (i < 0 || i >= stage.size()) throw ValidationError("machine index out of range");
  bounds.validate(stage.size());
  MachineModel mm;
  mm.index = i;
  mm.p = stage.p()[i];
  mm.d = stage.d()[i];
  mm.neighbors = stage.neighbors(i);
  for (int j : mm.neighbors) {
    mm.K.push_back(stage.K()(i, j));
    mm.u_lower.push_back(bounds.lower[j]);
    mm.u_upper.push_back(bounds.upper[j]);
  }
  return mm;
}

Vec2 decoupled_rhs(const MachineModel& machine, const Vec2& z, std::span<const double> u) {
  if (static_cast<int>(u.size()) != machine.n()) throw ValidationError("input length does not match neighbour count");
  double acc = machine.p - machine.d * z[1];
  for (int j = 0; j < machine.n(); ++j) acc -= machine.K[j] * std::sin(z[0] - u[j]);
  return {z[1], acc};
}

ode::Settings ode_settings(const SolverSettings& s) {
  ode::Settings o;
  o.abs_tol = s.abs_tol;
  o.rel_tol = s.rel_tol;
  return o;
}

ode::Trajectory<Vec> simulate_stage(const StageModel& stage, const Vec& x0, double t0, double t1,
                                    const ode::Settings& settings) {
  if (x0.size() != 2 * stage.size()) throw ValidationError("state length does not match the stage");
  return ode::integrate([&](double, const Vec& x) { return coupled_rhs(stage, x); }, x0, t0, t1, settings);
}

void write_trajectory_csv(std::ostream& out, const ode::Trajectory<Vec>& traj, double dt) {
  const int m = static_cast<int>(traj.back().size() / 2);
  out << "t";
  for (int i = 1; i <= m; ++i) out << ", x_" << i << "1";
  for (int i = 1; i <= m; ++i) out << ", x_" << i << "2";
  out << "\n" << std::setprecision(12);
  auto row = [&](double t) {
    const Vec x = traj(t);
    out << t;
    for (Eigen::Index k = 0; k < x.size(); ++k) out << ", " << x[k];
    out << "\n";
  };
  const double t0 = traj.t_begin(), t1 = traj.t_end();
  const long n = dt > 0 ? static_cast<long>(std::floor((t1 - t0) / dt + 1e-9)) : 0;
  for (long k = 0; k <= n; ++k) row(t0 + k * dt);
  if (n == 0 || t0 + n * dt < t1 - 1e-12) row(t1);
}

}  // namespace safecct
