#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace rvlab {

struct CheckResult {
  std::string name;
  double value = 0;
  double limit = 0;
  bool pass = false;
};

// Inequality and conservation suites on small self-contained problems.
// quick shrinks the sample counts and horizons.
std::vector<CheckResult> run_check_suite(std::uint64_t seed, bool quick);

void print_checks(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace rvlab
