#include "safecct/safety_sets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace safecct {

namespace {

constexpr double kCapCeiling = 1e3;
constexpr double kCapFloor = 10.0;

/// A z1-monotone piece of a barrier curve in one half-plane, stored with ascending z1.
struct Arc {
  bool upper = true;
  std::vector<double> x;
  std::vector<double> y;
  int curve = 0;

  double x0() const { return x.front(); }
  double x1() const { return x.back(); }
  double at(double q) const {
    if (q <= x.front()) return y.front();
    if (q >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), q);
    const auto k = static_cast<std::size_t>(it - x.begin());
    const double s = (q - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + s * (y[k] - y[k - 1]);
  }
};

void clip_to_cap(BarrierCurve& c, double cap) {
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    if (std::abs(c.points[k][1]) > cap) {
      const Vec2 a = c.points[k - 1], b = c.points[k];
      const double target = b[1] > 0 ? cap : -cap;
      const double s = (target - a[1]) / (b[1] - a[1]);
      Vec2 e = a + s * (b - a);
      e[1] = target;
      c.points.resize(k);
      c.points.push_back(e);
      c.stop = PathEnd::cap;
      return;
    }
  }
}

std::vector<Arc> split_arcs(const BarrierCurve& c, int index) {
  std::vector<Arc> out;
  std::vector<Vec2> run;
  int sign = 0;
  auto flush = [&] {
    if (run.size() >= 2 && sign != 0) {
      Arc a;
      a.upper = sign > 0;
      a.curve = index;
      if (run.front()[0] > run.back()[0]) std::reverse(run.begin(), run.end());
      for (const Vec2& p : run) {
        if (!a.x.empty() && p[0] <= a.x.back()) continue;
        a.x.push_back(p[0]);
        a.y.push_back(p[1]);
      }
      if (a.x.size() >= 2) out.push_back(std::move(a));
    }
    run.clear();
    sign = 0;
  };
  for (const Vec2& p : c.points) {
    const int s = p[1] > 0 ? 1 : (p[1] < 0 ? -1 : 0);
    if (s == 0) {
      run.push_back(p);
      flush();
      run.push_back(p);
      continue;
    }
    if (sign != 0 && s != sign) {
      const Vec2 a = run.back();
      const double t = a[1] / (a[1] - p[1]);
      const Vec2 q(a[0] + t * (p[0] - a[0]), 0.0);
      run.push_back(q);
      flush();
      run.push_back(q);
    }
    run.push_back(p);
    sign = s;
  }
  flush();
  return out;
}

struct Level {
  double value;
  int arc;  // -1: constant
  double constant;
};

double level_at(const Level& l, const std::vector<Arc>& arcs, double x) {
  return l.arc < 0 ? l.constant : arcs[l.arc].at(x);
}

void append_level(geom::Polygon& poly, const Level& l, const std::vector<Arc>& arcs, double a, double b,
                  bool ascending) {
  std::vector<Vec2> pts;
  pts.emplace_back(a, level_at(l, arcs, a));
  if (l.arc >= 0) {
    const Arc& arc = arcs[l.arc];
    for (std::size_t k = 0; k < arc.x.size(); ++k)
      if (arc.x[k] > a && arc.x[k] < b) pts.emplace_back(arc.x[k], arc.y[k]);
  }
  pts.emplace_back(b, level_at(l, arcs, b));
  if (!ascending) std::reverse(pts.begin(), pts.end());
  poly.insert(poly.end(), pts.begin(), pts.end());
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

const char* to_string(SetKind kind) { return kind == SetKind::admissible ? "admissible" : "mrpi"; }

InputMode mode_for(SetKind kind) { return kind == SetKind::admissible ? InputMode::helpful : InputMode::harmful; }

Membership contains(const SafetySet& set, const Vec2& z) {
  if (set.empty) return {};
  return {geom::inside(set.boundary, z), geom::boundary_distance(set.boundary, z) <= set.tol_band};
}

bool interior(const SafetySet& set, const Vec2& z, double margin) {
  if (set.empty) return false;
  return geom::inside(set.boundary, z) && geom::boundary_distance(set.boundary, z) > margin;
}

double volume(const SafetySet& set) { return set.empty ? 0.0 : geom::area(set.boundary); }

PlanarOptions curve_options(const SolverSettings& s, const Slab& slab) {
  PlanarOptions o;
  o.abs_tol = s.abs_tol;
  o.rel_tol = s.rel_tol;
  o.horizon = s.backward_horizon_s;
  o.cap = s.z2_cap > 0 ? s.z2_cap : kCapCeiling;
  o.closure_tol = s.closure_tol * slab.width();
  o.record = true;
  o.drift_exit = false;
  return o;
}

BarrierCurve barrier_curve(const MachineModel& machine, const Bounds& bounds, Corner corner, InputMode mode,
                           const SolverSettings& settings) {
  const Slab slab{bounds.lower[machine.index], bounds.upper[machine.index]};
  const ClosedLoop cl(machine, slab, mode, curve_options(settings, slab));
  BarrierCurve c;
  c.origin = corner == Corner::upper ? "corner_upper" : "corner_lower";
  const Vec2 start(corner == Corner::upper ? slab.hi : slab.lo, 0.0);
  const bool tangent = corner == Corner::upper ? cl.upper(slab.hi) < 0.0 : cl.lower(slab.lo) > 0.0;
  if (!tangent) {
    c.points = {start};
    c.stop = PathEnd::not_tangent;
    return c;
  }
  const auto path = cl.backward(start, corner == Corner::upper ? Phase::upper : Phase::lower, cl.options().horizon);
  c.points = path.points;
  c.stop = path.end;
  return c;
}

SafetySet assemble_set(const MachineModel& machine, const Bounds& bounds, SetKind kind, const SolverSettings& settings,
                       std::optional<Vec2> probe) {
  bounds.validate(bounds.size());
  SafetySet set;
  set.machine = machine.index;
  set.kind = kind;
  set.slab = {bounds.lower[machine.index], bounds.upper[machine.index]};
  const Slab& slab = set.slab;
  const double width = slab.width();
  set.tol_band = settings.tol_band_frac * width;
  const InputMode mode = mode_for(kind);

  const ClosedLoop cl(machine, slab, mode, curve_options(settings, slab));
  PlanarOptions probe_opts = cl.options();
  probe_opts.record = false;
  probe_opts.drift_exit = true;
  probe_opts.cap = INFINITY;
  probe_opts.horizon = std::max(60.0, settings.oracle_horizon_s);
  const ClosedLoop sim(machine, slab, mode, probe_opts);

  SetLog& log = set.log;
  log.critical_points = cl.critical_points();
  const double d = cl.damping();
  const double eps = 1e-6 * std::max(1.0, width);
  const double hd = 1e-7 * std::max(1.0, width);
  auto is_zero_of = [&](const std::vector<double>& zs, double x) {
    return std::any_of(zs.begin(), zs.end(), [&](double z) { return std::abs(z - x) <= 1e-9 * std::max(1.0, width); });
  };
  auto trace = [&](Vec2 start, Phase phase, std::string origin, std::optional<Vec2> anchor) {
    BarrierCurve c;
    c.origin = std::move(origin);
    const auto path = cl.backward(start, phase, cl.options().horizon);
    c.points = path.points;
    if (anchor) c.points.insert(c.points.begin(), *anchor);
    c.stop = path.end;
    log.curves.push_back(std::move(c));
  };

  for (double z : log.critical_points) {
    const bool uz = is_zero_of(cl.upper_zeros(), z);
    const bool lz = is_zero_of(cl.lower_zeros(), z);
    const double T = uz ? 0.0 : cl.upper(z);
    const double B = lz ? 0.0 : cl.lower(z);
    const std::string at = fmt(z);
    if (T < 0.0 && z > slab.lo) trace({z, 0.0}, Phase::upper, z == slab.hi ? "corner_upper" : "upper@" + at, {});
    if (B > 0.0 && z < slab.hi) trace({z, 0.0}, Phase::lower, z == slab.lo ? "corner_lower" : "lower@" + at, {});
    // strong stable manifold of a real-eigenvalue rest point of the half-plane flow
    if (uz) {
      const double slope = (cl.upper(z + hd) - cl.upper(z - hd)) / (2 * hd);
      const double disc = d * d + 4 * slope;
      if (disc >= 0.0 && z - eps > slab.lo) {
        const double ls = 0.5 * (d + std::sqrt(disc));
        trace({z - eps, eps * ls}, Phase::upper, (slope > 0 ? "upper_saddle@" : "upper_node@") + at, Vec2(z, 0.0));
      }
    }
    if (lz) {
      const double slope = (cl.lower(z + hd) - cl.lower(z - hd)) / (2 * hd);
      const double disc = d * d + 4 * slope;
      if (disc >= 0.0 && z + eps < slab.hi) {
        const double ls = 0.5 * (d + std::sqrt(disc));
        trace({z + eps, -eps * ls}, Phase::lower, (slope > 0 ? "lower_saddle@" : "lower_node@") + at, Vec2(z, 0.0));
      }
    }
  }

  if (settings.z2_cap > 0) {
    set.cap = settings.z2_cap;
  } else {
    double reach = 0.0;
    for (const auto& c : log.curves) {
      if (c.stop != PathEnd::exit_low && c.stop != PathEnd::exit_high) continue;
      for (const Vec2& p : c.points) reach = std::max(reach, std::abs(p[1]));
    }
    set.cap = std::min(kCapCeiling, std::max(kCapFloor, 4.0 * reach));
  }
  for (auto& c : log.curves) clip_to_cap(c, set.cap);

  std::vector<Arc> arcs;
  for (std::size_t k = 0; k < log.curves.size(); ++k) {
    auto pieces = split_arcs(log.curves[k], static_cast<int>(k));
    for (auto& a : pieces) {
      if (a.x1() <= slab.lo || a.x0() >= slab.hi) continue;
      arcs.push_back(std::move(a));
    }
  }

  const double snap = 1e-10 * std::max(1.0, width);
  std::vector<double> bp = {slab.lo, slab.hi};
  for (const Arc& a : arcs) {
    bp.push_back(std::clamp(a.x0(), slab.lo, slab.hi));
    bp.push_back(std::clamp(a.x1(), slab.lo, slab.hi));
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end(), [&](double a, double b) { return b - a <= snap; }), bp.end());
  log.breakpoints = bp;

  struct Interval {
    Level bottom;
    Level top;
  };
  std::vector<std::optional<Interval>> strips(bp.size() - 1);
  const double thin = 1e-12 * set.cap;
  for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
    const double a = bp[k], b = bp[k + 1];
    const double mid = 0.5 * (a + b);
    std::vector<Level> levels = {{-set.cap, -1, -set.cap}, {0.0, -1, 0.0}, {set.cap, -1, set.cap}};
    for (std::size_t q = 0; q < arcs.size(); ++q) {
      const Arc& arc = arcs[q];
      if (arc.x0() <= a + snap && arc.x1() >= b - snap)
        levels.push_back({std::clamp(arc.at(mid), -set.cap, set.cap), static_cast<int>(q), 0.0});
    }
    std::sort(levels.begin(), levels.end(), [](const Level& l, const Level& r) { return l.value < r.value; });

    std::vector<Interval> groups;
    bool open = false;
    for (std::size_t f = 0; f + 1 < levels.size(); ++f) {
      const Level& lo = levels[f];
      const Level& hi = levels[f + 1];
      if (hi.value - lo.value <= thin) continue;
      ++log.faces;
      const bool ok = sim.viable(Vec2(mid, 0.5 * (lo.value + hi.value)));
      if (ok) {
        ++log.viable_faces;
        if (open)
          groups.back().top = hi;
        else
          groups.push_back({lo, hi});
      }
      open = ok;
    }
    if (groups.size() > 1) {
      std::ostringstream msg;
      msg << "ambiguous topology: machine " << machine.index + 1 << " " << to_string(kind) << " has " << groups.size()
          << " separate viable bands over z1 in [" << a << ", " << b << "]";
      throw TopologyError(msg.str());
    }
    if (!groups.empty()) strips[k] = groups.front();
  }

  std::size_t first = strips.size(), last = 0;
  for (std::size_t k = 0; k < strips.size(); ++k)
    if (strips[k]) {
      first = std::min(first, k);
      last = k;
    }

  if (first == strips.size()) {
    set.empty = true;
    log.notes.push_back("no viable region");
  } else {
    for (std::size_t k = first; k <= last; ++k)
      if (!strips[k])
        throw TopologyError("ambiguous topology: machine " + std::to_string(machine.index + 1) + " " +
                            to_string(kind) + " splits into disconnected pieces along z1");
    for (std::size_t k = first; k < last; ++k) {
      const double x = bp[k + 1];
      const double lo = std::max(level_at(strips[k]->bottom, arcs, x), level_at(strips[k + 1]->bottom, arcs, x));
      const double hi = std::min(level_at(strips[k]->top, arcs, x), level_at(strips[k + 1]->top, arcs, x));
      if (!(hi > lo))
        throw TopologyError("ambiguous topology: machine " + std::to_string(machine.index + 1) + " " +
                            to_string(kind) + " pinches at z1 = " + fmt(x));
    }
    geom::Polygon poly;
    for (std::size_t k = first; k <= last; ++k) append_level(poly, strips[k]->bottom, arcs, bp[k], bp[k + 1], true);
    for (std::size_t k = last + 1; k-- > first;) append_level(poly, strips[k]->top, arcs, bp[k], bp[k + 1], false);
    poly = geom::simplify(poly, 1e-12 * std::max(1.0, width));
    if (geom::signed_area(poly) <= 0.0) {
      set.empty = true;
      log.notes.push_back("composed boundary has non-positive area");
    } else {
      if (!geom::is_simple(poly))
        throw TopologyError("ambiguous topology: machine " + std::to_string(machine.index + 1) + " " +
                            to_string(kind) + " boundary is not simple");
      set.empty = false;
      set.boundary = std::move(poly);
    }
  }

  if (probe && (probe->x() >= slab.lo && probe->x() <= slab.hi) && std::abs(probe->y()) <= set.cap) {
    const auto m = contains(set, *probe);
    if (!m.near_boundary) {
      const bool sim_ok = sim.viable(*probe);
      if (sim_ok != m.inside)
        throw TopologyError("ambiguous topology: machine " + std::to_string(machine.index + 1) + " " +
                            to_string(kind) + " probe (" + fmt(probe->x()) + ", " + fmt(probe->y()) + ") simulates " +
                            (sim_ok ? "inside" : "outside") + " but the boundary says " +
                            (m.inside ? "inside" : "outside"));
      log.notes.push_back(std::string("probe agrees: ") + (sim_ok ? "inside" : "outside"));
    } else {
      log.notes.push_back("probe lies in the boundary band");
    }
  }
  return set;
}

Vec2 OracleGrid::point(int i, int j) const {
  return {slab.lo + (i + 0.5) * slab.width() / n1, -cap + (j + 0.5) * 2.0 * cap / n2};
}

OracleGrid oracle_set(const MachineModel& machine, const Bounds& bounds, SetKind kind, const SolverSettings& settings,
                      double cap, int resolution, Exec exec) {
  OracleGrid g;
  g.n1 = g.n2 = resolution;
  g.slab = {bounds.lower[machine.index], bounds.upper[machine.index]};
  g.cap = cap;
  g.inside.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  PlanarOptions o;
  o.abs_tol = settings.abs_tol;
  o.rel_tol = settings.rel_tol;
  o.horizon = settings.oracle_horizon_s;
  o.drift_exit = true;
  const ClosedLoop cl(machine, g.slab, mode_for(kind), o);
  for_each_index(g.n2, exec, [&](long j) {
    for (int i = 0; i < g.n1; ++i)
      g.inside[static_cast<std::size_t>(j) * g.n1 + i] = cl.viable(g.point(i, static_cast<int>(j))) ? 1 : 0;
  });
  return g;
}

Agreement compare_with_oracle(const SafetySet& set, const OracleGrid& grid) {
  Agreement a;
  for (int j = 0; j < grid.n2; ++j) {
    for (int i = 0; i < grid.n1; ++i) {
      const Vec2 q = grid.point(i, j);
      const auto m = contains(set, q);
      if (m.near_boundary) {
        ++a.skipped;
        continue;
      }
      ++a.compared;
      if (m.inside == grid.at(i, j)) ++a.agreed;
    }
  }
  return a;
}

}  // namespace safecct
