#include "safecct/push_profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace safecct {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Integer k with w_lo <= target + 2πk <= w_hi, if any.
bool hits(double target, double w_lo, double w_hi, double& k_out) {
  const double k = std::ceil((w_lo - target) / kTwoPi);
  k_out = k;
  return target + kTwoPi * k <= w_hi;
}

double pick(double z1, double a, double b, double target, bool minimise) {
  double k;
  if (hits(target, z1 - b, z1 - a, k)) return z1 - (target + kTwoPi * k);
  const double sb = std::sin(z1 - b), sa = std::sin(z1 - a);
  if (minimise) return sb <= sa ? b : a;
  return sb >= sa ? b : a;
}

}  // namespace

const char* to_string(InputMode mode) { return mode == InputMode::helpful ? "helpful" : "harmful"; }

std::vector<double> extremal_input(const MachineModel& machine, double z1, InputMode mode) {
  std::vector<double> u(machine.n());
  const bool minimise = mode == InputMode::helpful;
  for (int j = 0; j < machine.n(); ++j)
    u[j] = pick(z1, machine.u_lower[j], machine.u_upper[j], minimise ? -kPi / 2 : kPi / 2, minimise);
  return u;
}

std::vector<double> feedback_input(const MachineModel& machine, const Vec2& z, InputMode mode) {
  if (z[1] == 0.0) return extremal_input(machine, z[0], mode);
  const bool raise = (mode == InputMode::helpful) == (z[1] < 0.0);
  return extremal_input(machine, z[0], raise ? InputMode::helpful : InputMode::harmful);
}

PushProfile::PushProfile(const MachineModel& machine) : p_(machine.p), d_(machine.d) {
  for (int j = 0; j < machine.n(); ++j) {
    const double a = machine.u_lower[j], b = machine.u_upper[j];
    nb_.push_back({machine.K[j], a, b, std::sin(a), std::cos(a), std::sin(b), std::cos(b)});
  }
}

double PushProfile::up(double z1) const {
  const double s = std::sin(z1), c = std::cos(z1);
  double acc = p_;
  for (const Nb& n : nb_) {
    double k;
    if (hits(-kPi / 2, z1 - n.b, z1 - n.a, k)) {
      acc += n.K;
    } else {
      const double sb = s * n.cb - c * n.sb;
      const double sa = s * n.ca - c * n.sa;
      acc -= n.K * std::min(sa, sb);
    }
  }
  return acc;
}

double PushProfile::down(double z1) const {
  const double s = std::sin(z1), c = std::cos(z1);
  double acc = p_;
  for (const Nb& n : nb_) {
    double k;
    if (hits(kPi / 2, z1 - n.b, z1 - n.a, k)) {
      acc -= n.K;
    } else {
      const double sb = s * n.cb - c * n.sb;
      const double sa = s * n.ca - c * n.sa;
      acc -= n.K * std::max(sa, sb);
    }
  }
  return acc;
}

std::vector<double> PushProfile::kinks(double lo, double hi) const {
  std::vector<double> out;
  auto add_family = [&](double base, double period) {
    const double k0 = std::ceil((lo - base) / period);
    for (double k = k0; base + k * period <= hi; k += 1.0) out.push_back(base + k * period);
  };
  for (const Nb& n : nb_) {
    for (double e : {n.a, n.b}) {
      add_family(e - kPi / 2, kTwoPi);
      add_family(e + kPi / 2, kTwoPi);
    }
    if (n.b > n.a) add_family(0.5 * (kPi + n.a + n.b), kPi);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double x, double y) { return std::abs(x - y) < 1e-13; }), out.end());
  return out;
}

}  // namespace safecct
