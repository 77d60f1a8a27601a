#pragma once

#include <string>
#include <vector>

namespace dephasim {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Invariant and oracle checks: two-site coherent and incoherent limits,
/// density-matrix invariants over the built-in scenarios, and agreement of
/// the trajectory ensemble with the master equation.
std::vector<ValidationCheck> run_validation_suite();

}  // namespace dephasim
