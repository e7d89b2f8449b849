#include "safecct/planar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace safecct {

const char* to_string(PathEnd end) {
  switch (end) {
    case PathEnd::exit_low: return "exit_low";
    case PathEnd::exit_high: return "exit_high";
    case PathEnd::rest: return "rest";
    case PathEnd::horizon: return "horizon";
    case PathEnd::cap: return "cap";
    case PathEnd::closed: return "closed";
    case PathEnd::axis_origin: return "axis_origin";
    case PathEnd::not_tangent: return "not_tangent";
  }
  return "?";
}

namespace {

constexpr int kScan = 512;

template <class F>
std::vector<double> zeros_of(F&& f, double lo, double hi, const std::vector<double>& kinks) {
  std::vector<double> xs;
  for (int k = 0; k <= kScan; ++k) xs.push_back(lo + (hi - lo) * k / kScan);
  xs.insert(xs.end(), kinks.begin(), kinks.end());
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  double xa = xs.front(), fa = f(xa);
  if (fa == 0.0) out.push_back(xa);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const double xb = xs[k], fb = f(xb);
    if (xb <= xa) continue;
    if (fb == 0.0) {
      out.push_back(xb);
    } else if (fa != 0.0 && (fa < 0.0) != (fb < 0.0)) {
      double a = xa, b = xb, va = fa;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double vm = f(m);
        if (vm == 0.0) {
          a = b = m;
          break;
        }
        if ((vm < 0.0) == (va < 0.0)) {
          a = m;
          va = vm;
        } else {
          b = m;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    xa = xb;
    fa = fb;
  }
  return out;
}

struct Code {
  int slab;
  bool cap;
  bool side;
  bool drift;
  long kink;
  bool operator==(const Code&) const = default;
};

}  // namespace

ClosedLoop::ClosedLoop(const MachineModel& machine, Slab slab, InputMode mode, PlanarOptions opts)
    : profile_(machine), slab_(slab), mode_(mode), opts_(opts) {
  if (!(slab.lo < slab.hi)) throw ValidationError("slab must have lo < hi");
  const double pad = 1e-9 * std::max(1.0, slab.width());
  kinks_ = profile_.kinks(slab.lo - 1.0, slab.hi + 1.0);
  std::vector<double> inner;
  for (double k : kinks_)
    if (k > slab.lo + pad && k < slab.hi - pad) inner.push_back(k);
  upper_zeros_ = zeros_of([&](double x) { return upper(x); }, slab.lo, slab.hi, inner);
  lower_zeros_ = zeros_of([&](double x) { return lower(x); }, slab.lo, slab.hi, inner);

  critical_ = {slab.lo, slab.hi};
  critical_.insert(critical_.end(), upper_zeros_.begin(), upper_zeros_.end());
  critical_.insert(critical_.end(), lower_zeros_.begin(), lower_zeros_.end());
  std::sort(critical_.begin(), critical_.end());
  critical_.erase(std::unique(critical_.begin(), critical_.end(),
                              [&](double a, double b) { return std::abs(a - b) <= pad; }),
                  critical_.end());

  if (upper(slab.hi) <= 0.0)
    upper_last_stop_ = slab.hi;
  else if (!upper_zeros_.empty())
    upper_last_stop_ = upper_zeros_.back();
  else
    upper_last_stop_ = upper(slab.lo) <= 0.0 ? slab.lo : -INFINITY;

  if (lower(slab.lo) >= 0.0)
    lower_first_stop_ = slab.lo;
  else if (!lower_zeros_.empty())
    lower_first_stop_ = lower_zeros_.front();
  else
    lower_first_stop_ = lower(slab.hi) >= 0.0 ? slab.hi : INFINITY;
}

bool ClosedLoop::viable(const Vec2& z0, double horizon) const {
  if (z0[0] < slab_.lo || z0[0] > slab_.hi) return false;
  auto ok = [](const PlanarPath& p) { return p.end == PathEnd::rest || p.end == PathEnd::horizon; };
  if (z0[1] > 0.0) return ok(forward(z0, Phase::upper, horizon));
  if (z0[1] < 0.0) return ok(forward(z0, Phase::lower, horizon));
  const double T = upper(z0[0]), B = lower(z0[0]);
  if (T <= 0.0 && B >= 0.0) return true;
  if (T > 0.0 && B < 0.0) return ok(forward(z0, Phase::upper, horizon)) && ok(forward(z0, Phase::lower, horizon));
  return ok(forward(z0, T > 0.0 ? Phase::upper : Phase::lower, horizon));
}

PlanarPath ClosedLoop::forward(const Vec2& z0, Phase phase, double horizon) const {
  return run(z0, phase, 1.0, horizon);
}

PlanarPath ClosedLoop::backward(const Vec2& z0, Phase phase, double horizon) const {
  return run(z0, phase, -1.0, horizon);
}

PlanarPath ClosedLoop::run(Vec2 z, Phase phase, double dir, double horizon) const {
  PlanarPath path;
  const bool fwd = dir > 0.0;
  const double d = damping();
  const double lo = slab_.lo, hi = slab_.hi;
  const double cap = opts_.cap;
  auto keep = [&](double t, const Vec2& y) {
    if (!opts_.record) return;
    path.times.push_back(t);
    path.points.push_back(y);
  };
  auto finish = [&](PathEnd end, double t, const Vec2& y) {
    path.end = end;
    path.t_end = t;
    path.z_end = y;
    if (opts_.record && (path.points.empty() || path.points.back() != y || path.times.back() != t)) keep(t, y);
    return path;
  };

  double t = 0.0;
  double h = 0.0;
  std::vector<double> axis_hits;
  if (!fwd && z[1] == 0.0) axis_hits.push_back(z[0]);
  keep(t, z);

  for (long piece = 0;; ++piece) {
    if (piece > 200000) throw IntegrationError("closed loop: too many switching events");
    const bool up = phase == Phase::upper;
    auto field = [&](double z1) { return up ? upper(z1) : lower(z1); };
    auto rhs = [&](double, const Vec2& y) { return Vec2(dir * y[1], dir * (field(y[0]) - d * y[1])); };
    auto code = [&](const Vec2& y) {
      Code c;
      c.slab = y[0] < lo ? -1 : (y[0] > hi ? 1 : 0);
      c.cap = std::abs(y[1]) > cap;
      c.side = up ? y[1] < 0.0 : y[1] > 0.0;
      c.drift = fwd && opts_.drift_exit && (up ? y[0] > upper_last_stop_ : y[0] < lower_first_stop_);
      c.kink = std::upper_bound(kinks_.begin(), kinks_.end(), y[0]) - kinks_.begin();
      return c;
    };

    const Code c0 = code(z);
    if (c0.slab != 0) return finish(c0.slab < 0 ? PathEnd::exit_low : PathEnd::exit_high, t, z);
    if (c0.cap) return finish(PathEnd::cap, t, z);
    if (c0.drift) {
      path.by_drift = true;
      return finish(up ? PathEnd::exit_high : PathEnd::exit_low, t, z);
    }
    if (t >= horizon) return finish(PathEnd::horizon, t, z);

    Vec2 k1 = rhs(t, z);
    if (h <= 0.0) {
      ode::Settings s;
      s.abs_tol = opts_.abs_tol;
      s.rel_tol = opts_.rel_tol;
      h = ode::initial_step(z, k1, horizon - t, s);
    }

    bool event = false;
    Vec2 za = z, zb = z;
    Code cb = c0;
    while (t < horizon) {
      const bool last = t + h >= horizon;
      const double hh = last ? horizon - t : h;
      auto r = ode::dopri_step(rhs, t, z, k1, hh, opts_.abs_tol, opts_.rel_tol);
      if (!r.y1.allFinite() || !std::isfinite(r.err)) {
        if (hh < 1e-14) throw IntegrationError("closed loop: non-finite state near t=" + std::to_string(t));
        h = 0.25 * hh;
        continue;
      }
      if (r.err > 1.0) {
        h = hh * std::max(0.2, 0.9 * std::pow(r.err, -0.2));
        if (h < 1e-14 * std::max(1.0, t)) throw IntegrationError("closed loop: step-size underflow at t=" + std::to_string(t));
        continue;
      }
      if (++path.steps > 20'000'000) throw IntegrationError("closed loop: step budget exhausted");
      const double tn = last ? horizon : t + hh;
      const Code cn = code(r.y1);
      if (!(cn == c0)) {
        double a = t, b = tn;
        while (b - a > opts_.event_tol) {
          const double m = 0.5 * (a + b);
          if (code(r.seg.eval(m)) == c0)
            a = m;
          else
            b = m;
        }
        za = r.seg.eval(a);
        zb = b == tn ? r.y1 : r.seg.eval(b);
        cb = code(zb);
        if (opts_.record)
          for (int j = 1; j <= opts_.dense_samples; ++j) {
            const double s = t + (a - t) * j / (opts_.dense_samples + 1);
            keep(s, r.seg.eval(s));
          }
        t = b;
        event = true;
        break;
      }
      if (opts_.record) {
        for (int j = 1; j <= opts_.dense_samples; ++j) {
          const double s = t + hh * j / (opts_.dense_samples + 1);
          keep(s, r.seg.eval(s));
        }
        keep(tn, r.y1);
      }
      t = tn;
      z = r.y1;
      k1 = r.k7;
      h = hh * ode::next_step_factor(r.err);
    }
    if (!event) return finish(PathEnd::horizon, t, z);

    auto lerp_at = [&](int comp, double target) {
      const double den = zb[comp] - za[comp];
      const double s = den == 0.0 ? 1.0 : std::clamp((target - za[comp]) / den, 0.0, 1.0);
      return Vec2(za + s * (zb - za));
    };

    if (cb.slab != 0) {
      Vec2 e = lerp_at(0, cb.slab < 0 ? lo : hi);
      e[0] = cb.slab < 0 ? lo : hi;
      return finish(cb.slab < 0 ? PathEnd::exit_low : PathEnd::exit_high, t, e);
    }
    if (cb.cap) {
      const double target = zb[1] > 0 ? cap : -cap;
      Vec2 e = lerp_at(1, target);
      e[1] = target;
      return finish(PathEnd::cap, t, e);
    }
    if (cb.side) {
      Vec2 e = lerp_at(1, 0.0);
      e[1] = 0.0;
      keep(t, e);
      const double T = upper(e[0]), B = lower(e[0]);
      if (fwd) {
        if (up ? B >= 0.0 : T <= 0.0) return finish(PathEnd::rest, t, e);
        phase = up ? Phase::lower : Phase::upper;
      } else {
        const double tol = opts_.closure_tol;
        for (double x : axis_hits)
          if (std::abs(x - e[0]) <= tol) return finish(PathEnd::closed, t, e);
        axis_hits.push_back(e[0]);
        const bool cont = up ? (T > 0.0 && B >= 0.0) : (B < 0.0 && T <= 0.0);
        if (!cont) return finish(PathEnd::axis_origin, t, e);
        phase = up ? Phase::lower : Phase::upper;
      }
      z = e;
      continue;
    }
    if (cb.drift) {
      path.by_drift = true;
      return finish(up ? PathEnd::exit_high : PathEnd::exit_low, t, zb);
    }
    keep(t, zb);
    z = zb;  // switching locus of the feedback: restart the smooth piece
  }
}

}  // namespace safecct
