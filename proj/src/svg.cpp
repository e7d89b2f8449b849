#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "safecct/report.hpp"

namespace safecct {

namespace fs = std::filesystem;

namespace {

struct View {
  double x0, x1, y0, y1;
  double W = 640, H = 480, pad = 50;

  double sx(double x) const { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); }
  double sy(double y) const { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); }
};

std::string points_attr(const View& v, const std::vector<Vec2>& pts) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  for (const auto& p : pts) o << v.sx(p.x()) << ',' << v.sy(p.y()) << ' ';
  return o.str();
}

std::vector<Vec2> projected(const AnalysisReport& r, int i, const Slab& slab, double t_last) {
  std::vector<Vec2> out;
  const auto& tr = r.trajectory;
  if (tr.size() == 0) return out;
  const double t0 = tr.t_begin(), t1 = std::min(tr.t_end(), t_last);
  const int n = 400;
  for (int k = 0; k <= n; ++k) out.push_back(project(tr(t0 + (t1 - t0) * k / n), i, slab));
  return out;
}

void write_polyline_csv(const fs::path& path, const geom::Polygon& poly) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  out << "z1, z2\n" << std::setprecision(17);
  for (const auto& p : poly) out << p.x() << ", " << p.y() << '\n';
  if (!poly.empty()) out << poly.front().x() << ", " << poly.front().y() << '\n';
}

}  // namespace

std::string render_svg(const AnalysisReport& r, int i) {
  const auto& A = r.sets.at(i).admissible;
  const auto& M = r.sets.at(i).mrpi;
  const Slab slab = A.slab;
  const auto& c = r.cct.machines.at(i);
  const double shown_until = r.trajectory.size() ? r.trajectory.t_begin() +
                                                       (std::isfinite(c.t_admissible) ? c.t_admissible + 0.5 : 1e9)
                                                 : 0.0;
  const auto traj = projected(r, i, slab, shown_until);

  double ymax = slab.width();
  for (const auto& p : traj)
    if (p.x() >= slab.lo && p.x() <= slab.hi) ymax = std::max(ymax, 1.5 * std::abs(p.y()));
  ymax = std::min(ymax, std::max(A.cap, M.cap));
  View v{slab.lo - 0.1 * slab.width(), slab.hi + 0.1 * slab.width(), -ymax, ymax};

  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << v.W << "\" height=\"" << v.H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<defs><clipPath id=\"plot\"><rect x=\"" << v.pad << "\" y=\"" << v.pad << "\" width=\"" << v.W - 2 * v.pad
    << "\" height=\"" << v.H - 2 * v.pad << "\"/></clipPath></defs>\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<g clip-path=\"url(#plot)\">\n";
  o << "<rect class=\"slab\" x=\"" << v.sx(slab.lo) << "\" y=\"" << v.pad << "\" width=\"" << v.sx(slab.hi) - v.sx(slab.lo)
    << "\" height=\"" << v.H - 2 * v.pad << "\" fill=\"#f2f2f2\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  if (!A.empty)
    o << "<polygon class=\"admissible\" points=\"" << points_attr(v, A.boundary)
      << "\" fill=\"#cfe3f7\" stroke=\"#2b6cb0\" stroke-width=\"1.5\"/>\n";
  if (!M.empty)
    o << "<polygon class=\"mrpi\" points=\"" << points_attr(v, M.boundary)
      << "\" fill=\"#c6efce\" stroke=\"#2f855a\" stroke-width=\"1.5\"/>\n";
  o << "<line x1=\"" << v.pad << "\" y1=\"" << v.sy(0) << "\" x2=\"" << v.W - v.pad << "\" y2=\"" << v.sy(0)
    << "\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
  if (!traj.empty())
    o << "<polyline class=\"trajectory\" points=\"" << points_attr(v, traj)
      << "\" fill=\"none\" stroke=\"#c53030\" stroke-width=\"1.5\"/>\n";
  auto marker = [&](const Vec2& p, const char* cls, const char* color, const char* label) {
    o << "<circle class=\"" << cls << "\" cx=\"" << v.sx(p.x()) << "\" cy=\"" << v.sy(p.y()) << "\" r=\"4\" fill=\""
      << color << "\"/><text x=\"" << v.sx(p.x()) + 6 << "\" y=\"" << v.sy(p.y()) - 6 << "\">" << label << "</text>\n";
  };
  if (r.framed) {
    marker({rebase_angle(r.framed->pre_eq.angles[i], slab.center()), 0.0}, "pre-equilibrium", "black", "pre");
    marker({rebase_angle(r.framed->post_eq.angles[i], slab.center()), 0.0}, "post-equilibrium", "#555", "post");
  }
  if (r.trajectory.size()) {
    const double t0 = r.trajectory.t_begin();
    std::ostringstream lm, la;
    lm << std::setprecision(4) << "t_M=" << c.t_mrpi;
    la << std::setprecision(4) << "t_A=" << c.t_admissible;
    if (std::isfinite(c.t_mrpi) && !M.empty)
      marker(project(r.trajectory(t0 + c.t_mrpi), i, slab), "crossing-mrpi", "#2f855a", lm.str().c_str());
    if (std::isfinite(c.t_admissible) && !A.empty)
      marker(project(r.trajectory(t0 + c.t_admissible), i, slab), "crossing-admissible", "#2b6cb0", la.str().c_str());
  }
  o << "</g>\n";
  o << "<rect x=\"" << v.pad << "\" y=\"" << v.pad << "\" width=\"" << v.W - 2 * v.pad << "\" height=\""
    << v.H - 2 * v.pad << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << v.W / 2 << "\" y=\"" << v.H - 15 << "\" text-anchor=\"middle\">z1 [rad]  ("
    << slab.lo << " .. " << slab.hi << ")</text>\n";
  o << "<text x=\"15\" y=\"" << v.H / 2 << "\" transform=\"rotate(-90 15 " << v.H / 2
    << ")\" text-anchor=\"middle\">z2 [rad/s]  (+/-" << ymax << ")</text>\n";
  o << "<text x=\"" << v.pad << "\" y=\"30\" font-size=\"14\">" << r.scenario.machine_name(i) << "</text>\n";
  int line = 0;
  auto note = [&](const std::string& s) {
    o << "<text class=\"note\" x=\"" << v.W - v.pad << "\" y=\"" << 20 + 14 * line++ << "\" text-anchor=\"end\">" << s
      << "</text>\n";
  };
  if (A.empty) note("admissible set empty");
  if (M.empty) note("MRPI empty");
  o << "</svg>\n";
  return o.str();
}

std::vector<fs::path> export_geometry(const AnalysisReport& r, const fs::path& dir) {
  std::vector<fs::path> out;
  fs::create_directories(dir);
  for (int i = 0; i < static_cast<int>(r.sets.size()); ++i) {
    const std::string name = r.scenario.machine_name(i);
    for (const SafetySet* s : {&r.sets[i].admissible, &r.sets[i].mrpi}) {
      const auto path = dir / (name + "_" + to_string(s->kind) + ".csv");
      write_polyline_csv(path, s->boundary);
      out.push_back(path);
    }
    const auto svg = dir / (name + ".svg");
    std::ofstream f(svg);
    if (!f) throw std::ios_base::failure("cannot write " + svg.string());
    f << render_svg(r, i);
    out.push_back(svg);
  }
  if (r.trajectory.size()) {
    const auto path = dir / "fault_trajectory.csv";
    std::ofstream f(path);
    if (!f) throw std::ios_base::failure("cannot write " + path.string());
    write_trajectory_csv(f, r.trajectory, 0.01);
    out.push_back(path);
  }
  return out;
}

}  // namespace safecct
