#pragma once

#include <map>
#include <string>
#include <vector>

#include "incpose/grid.hpp"

namespace incpose {

// Ranked candidate poses from one solver run.
struct IncidenceResult {
  std::string method;
  double epsilon_requested = 0;
  double epsilon_effective = 0;
  std::vector<Candidate> candidates;
  // Counters; std::map keeps the output order stable.
  std::map<std::string, double> diagnostics;
};

}  // namespace incpose
