// Serial reference vs OpenMP kernels: oracle grid labelling and per-machine set assembly.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "safecct/cct.hpp"

using namespace safecct;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : SAFECCT_FIXTURE_DIR "/ieee14_en.json";
  const int resolution = argc > 2 ? std::atoi(argv[2]) : 80;
  const Scenario sc = load_scenario_file(path);
  const FramedScenario fs = frame_scenario(sc);
  const Bounds& b = fs.bounds();
  std::printf("threads=%d  scenario=%s  grid=%dx%d\n", omp_get_max_threads(), path.c_str(), resolution, resolution);

  std::vector<MachineSets> s_serial, s_par;
  const double ts = seconds([&] { s_serial = assemble_all(fs, b, sc.solver, Exec::serial); });
  const double tp = seconds([&] { s_par = assemble_all(fs, b, sc.solver, Exec::parallel); });
  bool same = true;
  for (std::size_t i = 0; i < s_serial.size(); ++i)
    same = same && s_serial[i].admissible.boundary == s_par[i].admissible.boundary &&
           s_serial[i].mrpi.boundary == s_par[i].mrpi.boundary;
  std::printf("%-22s serial %8.3f s  parallel %8.3f s  speedup %5.2f  identical=%s\n", "assemble_all", ts, tp,
              ts / tp, same ? "yes" : "no");

  for (int i = 0; i < fs.size(); ++i) {
    const MachineModel mm = make_machine(fs.post, b, i);
    const double cap = s_serial[i].admissible.cap;
    OracleGrid gs, gp;
    const double os = seconds([&] { gs = oracle_set(mm, b, SetKind::admissible, sc.solver, cap, resolution, Exec::serial); });
    const double op = seconds([&] { gp = oracle_set(mm, b, SetKind::admissible, sc.solver, cap, resolution, Exec::parallel); });
    std::printf("oracle %-15s serial %8.3f s  parallel %8.3f s  speedup %5.2f  identical=%s\n",
                sc.machine_name(i).c_str(), os, op, os / op, gs.inside == gp.inside ? "yes" : "no");
  }
  return 0;
}
