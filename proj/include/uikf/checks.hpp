#pragma once

#include <string>
#include <vector>

#include "uikf/model.hpp"

namespace uikf {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Gain irrelevance and one-step equivalence in the square case, dual-form
/// update equality, observer equivalence (square and general) and the Q̂^d
/// round trip.
std::vector<CheckResult> runPropertyChecks();

struct StabilityReport {
  std::string model;
  double rho_a_bar = 0.0;    ///< predictor error dynamics
  double rho_a_tilde = 0.0;  ///< filter error dynamics at steady state
};

/// Runs the optimal four-step filter's covariance recursion to steady state
/// and reports rho(Ā) and rho(Ã) for a time-invariant model.
StabilityReport stabilityReport(const std::string& name, const SystemModel& model,
                                std::size_t steps = 2000);

}  // namespace uikf
