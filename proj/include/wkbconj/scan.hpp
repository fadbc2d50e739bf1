// Sweep of the WKB direction over S^2 at a fixed base point: conjugate-time
// surfaces t(theta, phi), branch continuation, and assembly of the closed
// intervals of epiconjugate-point locations on the time axis.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wkbconj/icosphere.hpp"
#include "wkbconj/wkb.hpp"

namespace wkbconj {

struct ScanOptions {
  int grid_level = 4;
  double horizon = 50.0;
  OdeOptions ode;
  EventTolerances events;
  double degeneracy_rel = 1e-8;       // |c| < rel |omega| -> node excluded
  double near_degenerate_rel = 1e-3;  // below this, integrator tolerance is tightened
  bool first_only = false;
  bool dedupe_antipodal = true;  // solve one of each antipodal pair, mirror the other
  int threads = 0;               // 0 = hardware concurrency
};

struct NodeScan {
  std::vector<double> times;
  std::vector<EventMode> modes;
  std::vector<int> branch;  // branch id per time, filled by label_branches
  double c = 0.0;
  double det_w_drift = 0.0;
  bool degenerate = false;
  bool failed = false;
  bool mirrored = false;  // copied from the antipodal representative
  std::string error;
};

struct ScanResult {
  SphereGrid grid;
  std::vector<NodeScan> nodes;
  Vec3 omega_frame = Vec3::Zero();
  double horizon = 0.0;
  int n_branches = 0;
};

// Per-node failures are recorded, not propagated; degenerate nodes
// (|<omega, xi>| below the relative band) are flagged and skipped.
ScanResult scan_sphere(const LambdaSource& source, const ScanOptions& opts);

struct Interval {
  double lo = 0.0, hi = 0.0;
};

struct IntervalSet {
  std::vector<Interval> intervals;  // disjoint, sorted
  bool reaches_horizon = false;
  double gap_threshold = 0.0;  // adaptive clustering threshold actually used
};

// Clusters the union of all detected times; the gap threshold adapts to the
// empirical time variation between adjacent grid nodes.
IntervalSet assemble_intervals(const ScanResult& scan);

// Labels connected components of (node, time) pairs across grid edges.
void label_branches(ScanResult& scan);

// Predictor-corrector continuation of Tr W = 2 along the great circle
// xi(y) = cos(y) xi_start + sin(y) dir; dir must be a unit vector orthogonal
// to xi_start.  Throws BranchLost when the corrector cannot re-localize.
struct BranchPoint {
  double y = 0.0;
  Vec3 xi = Vec3::UnitZ();
  double t = 0.0;
  double predicted_t = 0.0;
};

std::vector<BranchPoint> continue_branch(const LambdaSource& source, const Vec3& xi_start,
                                         double t_start, const Vec3& dir, double dy,
                                         int n_steps, const ScanOptions& opts = {});

// Per-point comparison of the sphere-scan first time against the first zero
// of the full 3x3 operator determinant; the reduced problem sees fewer
// solutions, so its first time can only come later.
struct SummaryRow {
  Vec3 x = Vec3::Zero();
  std::optional<double> wkb_first;
  std::optional<double> full_first;
  bool inequality_ok = true;  // wkb_first >= full_first - tol whenever both exist
};

std::vector<SummaryRow> first_epiconjugate_summary(const std::vector<Vec3>& points,
                                                   const VectorField& u, const Metric& g,
                                                   const Chart& chart,
                                                   const ScanOptions& opts);

}  // namespace wkbconj
