// Built-in verification suite over the closed-form examples (trivial
// pullback, twisted torus, plane shear) and randomized property checks.
// Shared by the `examples` CLI command and the acceptance test binary.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wkbconj/ode45.hpp"

namespace wkbconj {

struct CheckResult {
  std::string id;
  std::string name;
  std::string detail;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;  // 0 = unbudgeted
};

struct CheckOptions {
  // When set, replaces each check's calibrated integrator tolerances; used to
  // demonstrate sensitivity (a loose rtol makes the det W drift check fail).
  std::optional<OdeOptions> ode_override;
  int threads = 0;
};

std::vector<CheckResult> run_builtin_checks(const CheckOptions& opts = {});

}  // namespace wkbconj
