#pragma once

#include <string>
#include <vector>

#include "quon/pseudoquon.hpp"

namespace quon {

inline constexpr int kCriterionCount = 12;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

// Three-subset configuration with supports below 6, used with alpha = i.
SubsetConfiguration worked_configuration();
BiorthogonalFamily worked_family(double q, int K);

// Runs criterion id in [1, kCriterionCount]; exceptions become a failed result.
CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_acceptance();

}  // namespace quon
