#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace engdiv {

/// One labelled pass/fail comparison of a measured value against a bound.
struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

inline bool all_passed(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

}  // namespace engdiv
