#include "safecct/bounds_opt.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

namespace safecct {

namespace {

struct Hull {
  Vec lo, hi, reach;  // reach: largest admissible outward margin per side
};

Hull equilibrium_hull(const FramedScenario& fs, double min_gap) {
  const int m = fs.size();
  Hull h{Vec(m), Vec(m), Vec(m)};
  for (int i = 0; i < m; ++i) {
    const double a = fs.pre_eq.angles[i];
    const double b = rebase_angle(fs.post_eq.angles[i], a);
    h.lo[i] = std::min(a, b);
    h.hi[i] = std::max(a, b);
    h.reach[i] = std::max(0.0, 0.5 * (2 * std::numbers::pi - (h.hi[i] - h.lo[i])) - min_gap);
  }
  return h;
}

Bounds from_margins(const Hull& h, const std::vector<double>& g) {
  const auto m = h.lo.size();
  Bounds b{Vec(m), Vec(m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    b.lower[i] = h.lo[i] - g[i];
    b.upper[i] = h.hi[i] + g[m + i];
  }
  return b;
}

bool within(double x, double lo, double hi) {
  const double a = rebase_angle(x, 0.5 * (lo + hi));
  return lo <= a && a <= hi;
}

}  // namespace

bool bounds_feasible(const FramedScenario& fs, const Bounds& b) {
  for (int i = 0; i < fs.size(); ++i) {
    if (!within(fs.pre_eq.angles[i], b.lower[i], b.upper[i])) return false;
    if (!within(fs.post_eq.angles[i], b.lower[i], b.upper[i])) return false;
  }
  return true;
}

BoundsCandidate objective(const FramedScenario& fs, const Bounds& bounds, const SolverSettings& settings,
                          const std::vector<double>& weights) {
  BoundsCandidate c;
  c.bounds = bounds;
  const int m = fs.size();
  bounds.validate(m);
  c.feasible = bounds_feasible(fs, bounds);
  if (!c.feasible) return c;
  c.areas.assign(m, 0.0);
  c.objective = 0.0;
  for (int i = 0; i < m; ++i) {
    const MachineModel mm = make_machine(fs.post, bounds, i);
    const Vec2 probe(rebase_angle(fs.post_eq.angles[i], 0.5 * (bounds.lower[i] + bounds.upper[i])), 0.0);
    try {
      c.areas[i] = volume(assemble_set(mm, bounds, SetKind::mrpi, settings, probe));
    } catch (const std::exception& e) {
      c.warnings.push_back(fs.scenario.machine_name(i) + ": " + e.what());
    }
    const double w = weights.empty() ? 1.0 : weights.at(i);
    c.objective += w * c.areas[i];
  }
  return c;
}

Bounds default_bounds(const FramedScenario& fs, double margin, double min_gap) {
  const Hull h = equilibrium_hull(fs, min_gap);
  const int m = fs.size();
  std::vector<double> g(2 * m);
  for (int i = 0; i < m; ++i) g[i] = g[m + i] = std::clamp(margin, min_gap, h.reach[i]);
  return from_margins(h, g);
}

OptimizeResult optimize_bounds(const FramedScenario& fs, const SolverSettings& settings, const OptimizeOptions& opts) {
  if (opts.budget < 1) throw ValidationError("budget must be at least 1");
  const int m = fs.size();
  if (!opts.weights.empty() && static_cast<int>(opts.weights.size()) != m)
    throw ValidationError("expected " + std::to_string(m) + " weights");
  const int dim = 2 * m;
  const Hull hull = equilibrium_hull(fs, opts.min_gap);
  auto reach = [&](int k) { return hull.reach[k % m]; };
  const double floor = opts.min_gap;
  const int np = opts.population > 0 ? opts.population : std::clamp(5 * dim, 6, 24);

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  OptimizeResult res;
  long used = 0;
  auto evaluate = [&](int generation, std::vector<std::vector<double>>& genomes) {
    const long n = std::min<long>(static_cast<long>(genomes.size()), opts.budget - used);
    genomes.resize(n);
    std::vector<BoundsCandidate> out(n);
    for_each_index(n, opts.exec, [&](long k) {
      out[k] = objective(fs, from_margins(hull, genomes[k]), settings, opts.weights);
      out[k].evaluation = used + k;
    });
    used += n;
    for (long k = 0; k < n; ++k) {
      if (out[k].feasible && (!res.best.feasible || out[k].objective > res.best.objective)) res.best = out[k];
      res.history.push_back({generation, static_cast<int>(k), out[k], res.best.objective});
    }
    return out;
  };

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (int k = 0; k < dim; ++k) pop[0][k] = std::clamp(opts.margin, floor, reach(k));
  for (int j = 1; j < np; ++j)
    for (int k = 0; k < dim; ++k) pop[j][k] = floor + unit(rng) * (reach(k) - floor);
  auto fit = evaluate(0, pop);

  for (int gen = 1; used < opts.budget; ++gen) {
    const int n = static_cast<int>(pop.size());
    std::vector<std::vector<double>> trial(n, std::vector<double>(dim));
    for (int j = 0; j < n; ++j) {
      int r[3];
      for (int q = 0; q < 3; ++q) {
        do {
          r[q] = static_cast<int>(unit(rng) * n) % n;
        } while (n > 3 && (r[q] == j || (q > 0 && r[q] == r[0]) || (q > 1 && r[q] == r[1])));
      }
      const int forced = static_cast<int>(unit(rng) * dim) % dim;
      for (int k = 0; k < dim; ++k) {
        const double v = pop[r[0]][k] + opts.F * (pop[r[1]][k] - pop[r[2]][k]);
        trial[j][k] = (k == forced || unit(rng) < opts.CR) ? std::clamp(v, floor, reach(k)) : pop[j][k];
      }
    }
    const auto tfit = evaluate(gen, trial);
    for (std::size_t j = 0; j < tfit.size(); ++j) {
      if (tfit[j].objective >= fit[j].objective) {
        pop[j] = trial[j];
        fit[j] = tfit[j];
      }
    }
  }
  if (!res.best.feasible) {
    std::string why = "no feasible bounds within budget";
    if (!res.history.empty() && !res.history.front().value.warnings.empty())
      why += ": " + res.history.front().value.warnings.front();
    throw SolverError(why);
  }
  return res;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& history) {
  out << "generation, candidate, objective, feasible";
  const int m = history.empty() ? 0 : history.front().value.bounds.size();
  for (int i = 1; i <= m; ++i) out << ", lower_" << i;
  for (int i = 1; i <= m; ++i) out << ", upper_" << i;
  out << '\n' << std::setprecision(17);
  for (const auto& h : history) {
    out << h.generation << ", " << h.candidate << ", " << h.value.objective << ", " << (h.value.feasible ? 1 : 0);
    for (int i = 0; i < m; ++i) out << ", " << h.value.bounds.lower[i];
    for (int i = 0; i < m; ++i) out << ", " << h.value.bounds.upper[i];
    out << '\n';
  }
}

}  // namespace safecct
