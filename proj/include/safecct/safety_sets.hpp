#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "safecct/exec.hpp"
#include "safecct/geometry.hpp"
#include "safecct/planar.hpp"

namespace safecct {

enum class SetKind { admissible, mrpi };
enum class Corner { upper, lower };

const char* to_string(SetKind kind);
InputMode mode_for(SetKind kind);

struct BarrierCurve {
  std::vector<Vec2> points;  // in backward-time order, starting at the tangency point
  PathEnd stop = PathEnd::not_tangent;
  std::string origin;
};

struct SetLog {
  std::vector<double> critical_points;
  std::vector<BarrierCurve> curves;
  std::vector<double> breakpoints;
  int faces = 0;
  int viable_faces = 0;
  std::vector<std::string> notes;
};

struct SafetySet {
  int machine = 0;
  SetKind kind = SetKind::admissible;
  bool empty = true;
  geom::Polygon boundary;  // counter-clockwise
  Slab slab{0.0, 1.0};
  double cap = 10.0;
  double tol_band = 0.0;
  SetLog log;
};

struct Membership {
  bool inside = false;
  bool near_boundary = false;
};

Membership contains(const SafetySet& set, const Vec2& z);
/// Strictly inside, farther than `margin` from the boundary.
bool interior(const SafetySet& set, const Vec2& z, double margin = 1e-9);
double volume(const SafetySet& set);

PlanarOptions curve_options(const SolverSettings& s, const Slab& slab);

BarrierCurve barrier_curve(const MachineModel& machine, const Bounds& bounds, Corner corner, InputMode mode,
                           const SolverSettings& settings);

/// `probe`, when given, is simulated and must agree with polygon membership unless it lies in the boundary band.
SafetySet assemble_set(const MachineModel& machine, const Bounds& bounds, SetKind kind, const SolverSettings& settings,
                       std::optional<Vec2> probe = std::nullopt);

struct OracleGrid {
  int n1 = 0;
  int n2 = 0;
  Slab slab{0.0, 1.0};
  double cap = 10.0;
  std::vector<std::uint8_t> inside;  // row-major, index j * n1 + i

  Vec2 point(int i, int j) const;
  bool at(int i, int j) const { return inside[static_cast<std::size_t>(j) * n1 + i] != 0; }
};

/// Cell-centred grid over the slab and [-cap, cap], labelled by direct closed-loop simulation.
OracleGrid oracle_set(const MachineModel& machine, const Bounds& bounds, SetKind kind, const SolverSettings& settings,
                      double cap, int resolution, Exec exec = Exec::parallel);

struct Agreement {
  long compared = 0;
  long agreed = 0;
  long skipped = 0;
  double fraction() const { return compared == 0 ? 1.0 : static_cast<double>(agreed) / compared; }
};

Agreement compare_with_oracle(const SafetySet& set, const OracleGrid& grid);

}  // namespace safecct
