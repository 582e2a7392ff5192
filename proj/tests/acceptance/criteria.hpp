#pragma once

#include <string>
#include <vector>

namespace srf::acceptance {

struct CriterionResult {
  int number = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the acceptance criteria (all of them, or the listed subset) and
/// returns one result per criterion.
std::vector<CriterionResult> run_criteria(const std::vector<int>& only = {});

/// Runs and prints one pass/fail line per criterion; returns 0 iff all
/// executed criteria passed.
int run_and_print(const std::vector<int>& only = {});

}  // namespace srf::acceptance
