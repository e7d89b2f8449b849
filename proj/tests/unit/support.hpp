#pragma once

#include <string>

#include "safecct/report.hpp"

namespace safecct::test {

inline std::string fixture(const std::string& name) { return std::string(SAFECCT_FIXTURE_DIR) + "/" + name; }

/// k = K_12, p = (P, -P), unit damping.
inline StageModel pair(double P, double k, double d = 1.0) {
  Mat K(2, 2);
  K << 0, k, k, 0;
  return StageModel(Vec2(P, -P), Vec2(d, d), K);
}

inline Scenario two_machine() { return load_scenario_file(fixture("two_machine.json")); }
inline Scenario ieee14() { return load_scenario_file(fixture("ieee14_en.json")); }

}  // namespace safecct::test
