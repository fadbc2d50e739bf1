// Deterministic machine-readable output: fixed %.12e float formatting,
// atomic file replacement (write to temp, rename).
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "wkbconj/flow.hpp"
#include "wkbconj/scan.hpp"

namespace wkbconj {

std::string format_sci(double v);
void atomic_write_file(const std::string& path, const std::string& content);

// CSV columns: t, eta1..eta3, Deta11..Deta33 (row-major), Lam11..Lam33 (row-major).
std::string trajectory_csv(const FlowSolution& flow, const std::vector<double>& times);

// CSV columns: theta, phi, xi1, xi2, xi3, branch_id, t.  One row per detected
// time, nodes in index order; degenerate and failed nodes contribute no rows.
std::string surface_csv(const ScanResult& scan);

// {"x": [...], "horizon": h, "intervals": [[a, b], ...], "reaches_horizon": flag}
std::string intervals_json(const Vec3& x, double horizon, const IntervalSet& set);

// Array of per-direction records:
// {"x", "theta", "phi", "c", "degenerate", "failed", "events": [{"t", "mode",
//  "kernel"}], "det_W_drift", "horizon"}.
std::string directions_json(const Vec3& x, const ScanResult& scan);

struct FirstRow {
  Vec3 x = Vec3::Zero();
  bool ok = false;      // an event was found
  bool failed = false;  // the solve errored
  double t = 0.0;
  Vec3 kernel = Vec3::Zero();
};

// CSV columns: x1, x2, x3, t, kernel1, kernel2, kernel3, status.
std::string first_csv(const std::vector<FirstRow>& rows);

}  // namespace wkbconj
