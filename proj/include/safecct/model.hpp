#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "safecct/error.hpp"

namespace safecct {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Edge {
  int i;
  int j;  // i < j, zero-based
  bool operator==(const Edge&) const = default;
};

/// One effective-network system: ẍ_i = p_i - Σ_j K_ij sin(x_i - x_j) - d_i ẋ_i.
class StageModel {
 public:
  StageModel() = default;
  /// Validates and stores; throws ValidationError naming the violated invariant.
  StageModel(Vec p, Vec d, Mat K);

  int size() const { return static_cast<int>(p_.size()); }
  const Vec& p() const { return p_; }
  const Vec& d() const { return d_; }
  const Mat& K() const { return K_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Zero-based neighbour indices of machine i, ascending.
  std::vector<int> neighbors(int i) const;

  bool operator==(const StageModel& o) const {
    return p_ == o.p_ && d_ == o.d_ && K_ == o.K_;
  }

 private:
  Vec p_;
  Vec d_;
  Mat K_;
  std::vector<Edge> edges_;
};

/// Angle box per machine: lower_i <= x_i1 <= upper_i.
struct Bounds {
  Vec lower;
  Vec upper;

  int size() const { return static_cast<int>(lower.size()); }
  double width(int i) const { return upper[i] - lower[i]; }
  void validate(int m) const;
  bool operator==(const Bounds& o) const { return lower == o.lower && upper == o.upper; }
};

struct SolverSettings {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  double event_tol = 1e-6;        // s, bisection target for crossing times
  double horizon_s = 5.0;         // initial fault-on horizon
  double horizon_cap_s = 60.0;    // automatic extension stops here
  double z2_cap = 0.0;            // rad/s; 0 selects the automatic cap
  int grid_resolution = 200;
  double backward_horizon_s = 30.0;
  double oracle_horizon_s = 20.0;
  double closure_tol = 1e-4;      // relative to slab width
  double tol_band_frac = 0.01;    // relative to slab width

  bool operator==(const SolverSettings&) const = default;
};

struct MachineMeta {
  std::string name;
  std::optional<double> H, D, r;
  bool operator==(const MachineMeta&) const = default;
};

struct Scenario {
  StageModel pre;
  StageModel fault;
  StageModel post;
  double t_fault = 0.0;
  std::optional<Bounds> bounds;
  SolverSettings solver;
  std::vector<MachineMeta> metadata;  // optional, pass-through only

  int size() const { return pre.size(); }
  std::string machine_name(int i) const;
  bool operator==(const Scenario&) const = default;
};

/// Full grid state; angles are stored wrapped to (-π, π].
struct GridState {
  Vec angles;
  Vec velocities;

  static GridState from_lifted(const Vec& lifted_angles, const Vec& velocities);
  /// Concatenated (angles, velocities) as used by the integrator.
  Vec stacked() const;
};

double wrap_angle(double a);
/// Shifts `a` by a multiple of 2π so that it lies in [center - π, center + π).
double rebase_angle(double a, double center);

Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);
std::string save_scenario(const Scenario& s);

/// Bounds from a file path or an inline "lo:hi,lo:hi,..." list.
Bounds parse_bounds_arg(const std::string& arg);

struct FrameShift {
  StageModel stage;
  double omega_synch;
};

/// Removes the synchronous drift Σp/Σd; the result has zero-sum injections.
FrameShift rotating_frame_shift(const StageModel& stage);
/// Expresses a stage in a frame rotating at `omega` (p_i -> p_i - d_i omega).
StageModel shift_by(const StageModel& stage, double omega);

}  // namespace safecct
