#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aoipg {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Fast invariant suite behind `aoi-pg check`: score-function and critic
/// gradients against finite differences, policy density normalization,
/// channel stationarity, penalty integrals against quadrature, cost
/// conservation and the wait oracle against simulation.
std::vector<CheckResult> run_checks(std::uint64_t seed = 1);

}  // namespace aoipg
