#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "wkbconj/field_io.hpp"
#include "wkbconj/scan.hpp"

using namespace wkbconj;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

LambdaSource killing_source(double wmag = 1.0) {
  return LambdaSource::identity(Vec3(0, 0, wmag));
}

ScanOptions fast_opts(int level, double horizon) {
  ScanOptions o;
  o.grid_level = level;
  o.horizon = horizon;
  o.threads = 2;
  return o;
}

}  // namespace

TEST_CASE("icosphere: counts, norms, connectivity, antipodes") {
  for (int level : {0, 1, 2}) {
    const SphereGrid grid = build_icosphere(level);
    CHECK(grid.size() == 10 * (1 << (2 * level)) + 2);
  }
  const SphereGrid g4 = build_icosphere(4);
  CHECK(g4.size() == 2562);

  const SphereGrid grid = build_icosphere(2);
  for (const Vec3& v : grid.nodes) CHECK(std::abs(v.norm() - 1.0) < 1e-12);

  // Connectivity via union-find over edges.
  std::vector<int> parent(grid.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : grid.edges) parent[find(a)] = find(b);
  for (int i = 0; i < grid.size(); ++i) CHECK(find(i) == find(0));

  // Antipodes are exact and involutive.
  for (int i = 0; i < grid.size(); ++i) {
    CHECK(grid.antipode[grid.antipode[i]] == i);
    CHECK((grid.nodes[i] + grid.nodes[grid.antipode[i]]).norm() == 0.0);
  }

  // A pole node exists (grid is pole-aligned).
  CHECK((grid.nodes[0] - Vec3(0, 0, 1)).norm() == 0.0);
}

TEST_CASE("icosphere: coarser levels are prefixes of finer ones") {
  const SphereGrid g2 = build_icosphere(2);
  const SphereGrid g3 = build_icosphere(3);
  REQUIRE(g3.size() > g2.size());
  for (int i = 0; i < g2.size(); ++i)
    CHECK((g2.nodes[i] - g3.nodes[i]).norm() == 0.0);
}

TEST_CASE("scan: rigid rotation times follow 2 pi n / cos(angle)") {
  const ScanResult scan = scan_sphere(killing_source(), fast_opts(2, 20.0));
  int checked = 0;
  for (int i = 0; i < scan.grid.size(); ++i) {
    const NodeScan& node = scan.nodes[i];
    const double c = Vec3(0, 0, 1).dot(scan.grid.nodes[i]);
    if (node.degenerate) continue;
    CHECK_FALSE(node.failed);
    const double first = kTwoPi / std::abs(c);
    std::size_t expected_count = first <= 20.0 ? static_cast<std::size_t>(20.0 / first) : 0;
    CHECK(node.times.size() == expected_count);
    for (std::size_t n = 0; n < node.times.size(); ++n) {
      CHECK(std::abs(node.times[n] - (n + 1) * first) < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("scan: zero vorticity flags every node degenerate") {
  const ScanResult scan = scan_sphere(LambdaSource::identity(Vec3::Zero()), fast_opts(1, 10.0));
  for (const auto& node : scan.nodes) {
    CHECK(node.degenerate);
    CHECK(node.times.empty());
  }
  CHECK(assemble_intervals(scan).intervals.empty());
}

TEST_CASE("scan: antipodal node time lists agree without deduplication") {
  const LoadedConfig cfg = parse_field_json(builtin_annulus_json());
  const LambdaSource src = LambdaSource::from_field(cfg.field.velocity, cfg.field.metric,
                                                    cfg.field.chart, Vec3(0.9, 0.0, 1.4));
  ScanOptions opts = fast_opts(1, 9.0);
  opts.dedupe_antipodal = false;
  const ScanResult scan = scan_sphere(src, opts);
  for (int i = 0; i < scan.grid.size(); ++i) {
    const int j = scan.grid.antipode[i];
    if (i >= j) continue;
    const auto& a = scan.nodes[i];
    const auto& b = scan.nodes[j];
    CHECK(a.degenerate == b.degenerate);
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t k = 0; k < a.times.size(); ++k)
      CHECK(std::abs(a.times[k] - b.times[k]) < 1e-6);
  }
}

TEST_CASE("scan: refinement keeps node times stable") {
  const LoadedConfig cfg = parse_field_json(builtin_annulus_json());
  const LambdaSource src = LambdaSource::from_field(cfg.field.velocity, cfg.field.metric,
                                                    cfg.field.chart, Vec3(0.9, 0.0, 1.4));
  const ScanResult coarse = scan_sphere(src, fast_opts(1, 9.0));
  const ScanResult fine = scan_sphere(src, fast_opts(2, 9.0));
  for (int i = 0; i < coarse.grid.size(); ++i) {
    const auto& a = coarse.nodes[i];
    const auto& b = fine.nodes[i];  // same direction: level-1 nodes prefix level 2
    CHECK(a.degenerate == b.degenerate);
    if (a.degenerate || a.failed) continue;
    REQUIRE(a.times.size() == b.times.size());
    for (std::size_t k = 0; k < a.times.size(); ++k)
      CHECK(std::abs(a.times[k] - b.times[k]) < 1e-6);
  }
}

TEST_CASE("intervals: rigid rotation produces one interval reaching the horizon") {
  const ScanResult scan = scan_sphere(killing_source(), fast_opts(2, 40.0));
  const IntervalSet set = assemble_intervals(scan);
  REQUIRE(set.intervals.size() == 1);
  CHECK(std::abs(set.intervals.front().lo - kTwoPi) < 1e-6);
  CHECK(set.reaches_horizon);

  // Horizon growth keeps earlier intervals.
  const IntervalSet shorter = assemble_intervals(scan_sphere(killing_source(), fast_opts(2, 20.0)));
  REQUIRE(shorter.intervals.size() == 1);
  CHECK(shorter.intervals.front().lo >= set.intervals.front().lo - 1e-6);
  CHECK(shorter.intervals.front().hi <= set.intervals.front().hi + 1e-6);
}

TEST_CASE("intervals: synthetic clusters split on large gaps") {
  ScanResult scan;
  scan.grid = build_icosphere(0);
  scan.horizon = 10.0;
  scan.nodes.assign(scan.grid.size(), NodeScan{});
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  for (auto& node : scan.nodes) {
    node.times = {1.0 + jitter(rng), 5.0 + jitter(rng)};
    std::sort(node.times.begin(), node.times.end());
    node.modes.assign(2, EventMode::TraceCrossing);
  }
  const IntervalSet set = assemble_intervals(scan);
  REQUIRE(set.intervals.size() == 2);
  CHECK(set.intervals[0].lo == doctest::Approx(1.0).epsilon(0.02));
  CHECK(set.intervals[1].lo == doctest::Approx(5.0).epsilon(0.02));
  CHECK_FALSE(set.reaches_horizon);

  label_branches(scan);
  CHECK(scan.n_branches == 2);
}

TEST_CASE("continuation: rigid rotation branch follows 2 pi / cos(y)") {
  const LambdaSource src = killing_source();
  // Start at xi0 = z axis, continue toward the equator.
  const auto branch = continue_branch(src, Vec3(0, 0, 1), kTwoPi, Vec3(1, 0, 0), 0.05, 10);
  REQUIRE(branch.size() == 11);
  for (const auto& p : branch) {
    CHECK(std::abs(p.t - kTwoPi / std::cos(p.y)) < 1e-6);
  }
  // The start is a symmetric extremum: predicted slope there is zero.
  CHECK(std::abs(branch[1].predicted_t - kTwoPi) < 1e-3);

  // Every branch point re-verified by an independent per-direction solve.
  for (const auto& p : branch) {
    const auto events = wkb_conjugate_times(
        evolve_w(ReducedSystem(src, WkbDirection::from_vector(p.xi)), p.t + 1.0), {}, false);
    double best = 1e9;
    for (const auto& e : events) best = std::min(best, std::abs(e.t - p.t));
    CHECK(best < 1e-8);
  }
}

TEST_CASE("continuation: transversal predictor matches the per-node re-solve") {
  const LoadedConfig cfg = parse_field_json(builtin_annulus_json());
  const LambdaSource src = LambdaSource::from_field(cfg.field.velocity, cfg.field.metric,
                                                    cfg.field.chart, Vec3(0.9, 0.0, 1.4));
  // A direction tilted away from the vorticity axis; its first event is
  // transversal for the twisted torus.
  const Vec3 xi0 = Vec3(0.3, 1.0, 0.2).normalized();
  OdeOptions opts;
  opts.rtol = 1e-11;
  opts.atol = 1e-13;
  const auto events =
      wkb_conjugate_times(evolve_w(ReducedSystem(src, WkbDirection::from_vector(xi0)), 16.0, opts),
                          {}, true);
  REQUIRE(!events.empty());
  REQUIRE(events.front().mode == EventMode::TraceCrossing);

  ScanOptions copts;
  copts.ode = opts;
  const Vec3 dir = xi0.cross(Vec3(0, 0, 1)).normalized();
  const auto branch = continue_branch(src, xi0, events.front().t, dir, 1e-3, 1, copts);
  REQUIRE(branch.size() == 2);

  const Vec3 xi1 = branch[1].xi;
  const auto recheck =
      wkb_conjugate_times(evolve_w(ReducedSystem(src, WkbDirection::from_vector(xi1)), 16.0, opts),
                          {}, false);
  double best = 1e9;
  for (const auto& e : recheck) best = std::min(best, std::abs(e.t - branch[1].t));
  CHECK(best < 1e-8);
  // One small predictor step lands near the corrected value.
  CHECK(std::abs(branch[1].predicted_t - branch[1].t) < 1e-4);
}

TEST_CASE("continuation: losing the level set raises BranchLost") {
  // Continue toward the degeneracy equator with a horizon that the growing
  // times leave almost immediately.
  const LambdaSource src = killing_source();
  ScanOptions opts;
  opts.horizon = 8.0;
  CHECK_THROWS_AS(
      continue_branch(src, Vec3(0, 0, 1), kTwoPi, Vec3(1, 0, 0), 0.3, 10, opts),
      BranchLost);
}

TEST_CASE("summary: rotation agrees on both solvers, torus keeps the gap") {
  const LoadedConfig killing = parse_field_json(builtin_killing_json());
  ScanOptions opts = fast_opts(2, 12.0);
  const auto rows_k =
      first_epiconjugate_summary({Vec3(1.1, -0.4, 0.25)}, killing.field.velocity,
                                 killing.field.metric, killing.field.chart, opts);
  REQUIRE(rows_k.size() == 1);
  REQUIRE(rows_k[0].wkb_first.has_value());
  REQUIRE(rows_k[0].full_first.has_value());
  CHECK(std::abs(*rows_k[0].wkb_first - kTwoPi) < 1e-5);
  CHECK(std::abs(*rows_k[0].full_first - kTwoPi) < 1e-5);
  CHECK(rows_k[0].inequality_ok);

  const LoadedConfig annulus = parse_field_json(builtin_annulus_json());
  const auto rows_a =
      first_epiconjugate_summary({Vec3(0.9, 0.0, 1.4)}, annulus.field.velocity,
                                 annulus.field.metric, annulus.field.chart, opts);
  REQUIRE(rows_a.size() == 1);
  REQUIRE(rows_a[0].full_first.has_value());
  CHECK(std::abs(*rows_a[0].full_first - kTwoPi) < 1e-4);
  if (rows_a[0].wkb_first) CHECK(*rows_a[0].wkb_first >= kTwoPi - 1e-4);
  CHECK(rows_a[0].inequality_ok);

  // No vorticity: neither solver reports a time.
  const LoadedConfig shear = parse_field_json(builtin_shear_json());
  VectorField constant = VectorField::from_expressions(
      {Expression::parse("0.2"), Expression::parse("0"), Expression::parse("0")}, true);
  const auto rows_c = first_epiconjugate_summary({Vec3(0, 0, 0)}, constant, shear.field.metric,
                                                 shear.field.chart, fast_opts(1, 10.0));
  REQUIRE(rows_c.size() == 1);
  CHECK_FALSE(rows_c[0].wkb_first.has_value());
  CHECK_FALSE(rows_c[0].full_first.has_value());
}
