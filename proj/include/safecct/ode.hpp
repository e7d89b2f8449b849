#pragma once

// Dormand-Prince 5(4) with the 4th-order continuous extension (Hairer, Nørsett & Wanner).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "safecct/error.hpp"

namespace safecct::ode {

struct Settings {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  double h_init = 0.0;   // 0 picks a starting step automatically
  double h_min = 1e-14;  // relative to the span
  double h_max = 0.0;    // 0: unlimited
  long max_steps = 5'000'000;
};

namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

/// Dense-output coefficients of one accepted step.
template <class V>
struct Segment {
  double t0, h;
  V r1, r2, r3, r4, r5;

  V eval(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
  }
};

template <class V>
struct StepResult {
  V y1;
  V k7;  // derivative at the new point (FSAL)
  double err;
  Segment<V> seg;
};

/// One trial step from (t, y) with derivative k1.
template <class V, class Rhs>
StepResult<V> dopri_step(Rhs& f, double t, const V& y, const V& k1, double h, double atol, double rtol) {
  using namespace dp;
  const V k2 = f(t + c2 * h, V(y + h * (a21 * k1)));
  const V k3 = f(t + c3 * h, V(y + h * (a31 * k1 + a32 * k2)));
  const V k4 = f(t + c4 * h, V(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const V k5 = f(t + c5 * h, V(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const V k6 = f(t + h, V(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
  V y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  V k7 = f(t + h, y1);
  const V errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sk = atol + rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
    acc += (errv[i] / sk) * (errv[i] / sk);
  }
  const double err = std::sqrt(acc / static_cast<double>(y.size()));
  const V ydiff = y1 - y;
  const V bspl = h * k1 - ydiff;
  Segment<V> seg{t, h, y, ydiff, bspl, V(ydiff - h * k7 - bspl),
                 V(h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7))};
  return {std::move(y1), std::move(k7), err, std::move(seg)};
}

template <class V>
double initial_step(const V& y, const V& k1, double span, const Settings& s) {
  if (s.h_init > 0) return std::min(s.h_init, span);
  double d0 = 0, d1 = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sk = s.abs_tol + s.rel_tol * std::abs(y[i]);
    d0 += (y[i] / sk) * (y[i] / sk);
    d1 += (k1[i] / sk) * (k1[i] / sk);
  }
  d0 = std::sqrt(d0 / y.size());
  d1 = std::sqrt(d1 / y.size());
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h = std::min(h, span);
  if (s.h_max > 0) h = std::min(h, s.h_max);
  return std::max(h, 1e-12 * std::max(1.0, span));
}

inline double next_step_factor(double err) {
  if (err == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

/// Accepted nodes plus dense output between them.
template <class V>
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(double t0, V x0) {
    times_.push_back(t0);
    states_.push_back(std::move(x0));
  }

  void append(const Segment<V>& seg, double t1, V y1) {
    segments_.push_back(seg);
    times_.push_back(t1);
    states_.push_back(std::move(y1));
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<V>& states() const { return states_; }
  std::size_t size() const { return times_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const V& back() const { return states_.back(); }

  /// Dense evaluation; exact at stored nodes.
  V operator()(double t) const {
    if (t <= times_.front()) return states_.front();
    if (t >= times_.back()) return states_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (t == times_[k]) return states_[k];
    return segments_[k].eval(t);
  }

  /// Drops everything after t; the new last node is the dense value at t.
  /// A clipped step keeps its original polynomial, which eval() only sees on [t0, t].
  void truncate(double t) {
    if (t >= times_.back()) return;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto k = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (times_[k] == t) {
      times_.resize(k + 1);
      states_.resize(k + 1);
      segments_.resize(k);
      return;
    }
    Segment<V> seg = segments_[k];
    V y = seg.eval(t);
    times_.resize(k + 1);
    states_.resize(k + 1);
    segments_.resize(k);
    segments_.push_back(std::move(seg));
    times_.push_back(t);
    states_.push_back(std::move(y));
  }

 private:
  std::vector<double> times_;
  std::vector<V> states_;
  std::vector<Segment<V>> segments_;
};

/// Integrates x' = f(t, x) on [t0, t1].
///
/// `stop(t, x)` is consulted after every accepted step; returning true ends the
/// integration there (the caller localizes the event on the dense output).
template <class V, class Rhs, class Stop>
Trajectory<V> integrate(Rhs&& f, V x0, double t0, double t1, const Settings& s, Stop&& stop) {
  if (!(t1 > t0)) throw IntegrationError("integrate: t1 must exceed t0");
  Trajectory<V> traj(t0, x0);
  V y = std::move(x0);
  V k1 = f(t0, y);
  if (!k1.allFinite()) throw IntegrationError("non-finite derivative at t0");
  const double span = t1 - t0;
  double h = initial_step(y, k1, span, s);
  double t = t0;
  long steps = 0;
  const double h_floor = s.h_min * std::max(1.0, std::abs(span));
  while (t < t1) {
    if (++steps > s.max_steps) throw IntegrationError("integrate: step budget exhausted at t=" + std::to_string(t));
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    auto r = dopri_step(f, t, y, k1, h, s.abs_tol, s.rel_tol);
    if (!r.y1.allFinite() || !std::isfinite(r.err)) {
      if (h <= h_floor) throw IntegrationError("non-finite derivative near t=" + std::to_string(t));
      h *= 0.25;
      continue;
    }
    if (r.err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(r.err, -0.2));
      if (h < h_floor) throw IntegrationError("step-size underflow at t=" + std::to_string(t));
      continue;
    }
    t = last ? t1 : t + h;
    y = r.y1;
    k1 = r.k7;
    traj.append(r.seg, t, y);
    if (stop(t, y)) break;
    h *= next_step_factor(r.err);
    if (s.h_max > 0) h = std::min(h, s.h_max);
  }
  return traj;
}

template <class V, class Rhs>
Trajectory<V> integrate(Rhs&& f, V x0, double t0, double t1, const Settings& s) {
  return integrate(std::forward<Rhs>(f), std::move(x0), t0, t1, s, [](double, const V&) { return false; });
}

/// Earliest time in the trajectory where `pred` turns true, localized by bisection.
///
/// Each step is additionally probed at `substeps` interior points so that short
/// excursions inside a single step are not missed.
template <class V, class Pred>
std::optional<double> event_time(const Trajectory<V>& traj, Pred&& pred, double tol = 1e-6, int substeps = 4) {
  const auto& ts = traj.times();
  if (pred(traj.states().front())) return ts.front();
  double prev = ts.front();
  for (std::size_t k = 1; k < ts.size(); ++k) {
    for (int j = 1; j <= substeps; ++j) {
      const double t = (j == substeps) ? ts[k] : ts[k - 1] + (ts[k] - ts[k - 1]) * j / substeps;
      if (pred(traj(t))) {
        double lo = prev, hi = t;
        while (hi - lo > tol) {
          const double mid = 0.5 * (lo + hi);
          if (pred(traj(mid)))
            hi = mid;
          else
            lo = mid;
        }
        return hi;
      }
      prev = t;
    }
  }
  return std::nullopt;
}

}  // namespace safecct::ode
