#include "wkbconj/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace wkbconj {

namespace {

NodeScan scan_one_node(const LambdaSource& src, const Vec3& xi, const ScanOptions& opts) {
  NodeScan out;
  const double omega_norm = src.omega().norm();
  out.c = src.omega().dot(xi);
  if (omega_norm < 1e-14 || std::abs(out.c) < opts.degeneracy_rel * omega_norm) {
    out.degenerate = true;
    return out;
  }
  OdeOptions ode = opts.ode;
  if (std::abs(out.c) < opts.near_degenerate_rel * omega_norm) {
    // First crossings grow like 1/c; keep the accumulated phase error in check.
    ode.rtol *= 1e-2;
    ode.atol *= 1e-2;
  }
  try {
    const ReducedSystem sys(src, WkbDirection::from_vector(xi));
    const WSolution w = evolve_w(sys, opts.horizon, ode);
    const auto events = wkb_conjugate_times(w, opts.events, opts.first_only);
    out.times.reserve(events.size());
    out.modes.reserve(events.size());
    for (const auto& e : events) {
      out.times.push_back(e.t);
      out.modes.push_back(e.mode);
    }
    out.det_w_drift = det_w_drift(w, opts.events);
  } catch (const std::exception& err) {
    out.failed = true;
    out.error = err.what();
  }
  return out;
}

}  // namespace

ScanResult scan_sphere(const LambdaSource& source, const ScanOptions& opts) {
  ScanResult result;
  result.grid = build_icosphere(opts.grid_level);
  result.omega_frame = source.omega();
  result.horizon = opts.horizon;
  const int n = result.grid.size();
  result.nodes.assign(n, NodeScan{});

  std::vector<int> work;
  work.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!opts.dedupe_antipodal || i <= result.grid.antipode[i]) work.push_back(i);
  }

  int n_threads = opts.threads > 0 ? opts.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(work.size())));

  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= work.size()) return;
      const int i = work[k];
      result.nodes[i] = scan_one_node(source, result.grid.nodes[i], opts);
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (opts.dedupe_antipodal) {
    // The reduced equation is invariant under xi -> -xi.
    for (int i = 0; i < n; ++i) {
      const int j = result.grid.antipode[i];
      if (i >= j) continue;
      result.nodes[j] = result.nodes[i];
      result.nodes[j].c = -result.nodes[i].c;
      result.nodes[j].mirrored = true;
    }
  }

  label_branches(result);
  return result;
}

namespace {

// Median of the nearest-time differences across adjacent nodes; the scale on
// which times vary between neighbouring directions.
double empirical_variation(const ScanResult& scan) {
  std::vector<double> diffs;
  for (const auto& [a, b] : scan.grid.edges) {
    const auto& ta = scan.nodes[a].times;
    const auto& tb = scan.nodes[b].times;
    if (ta.empty() || tb.empty()) continue;
    for (double t : ta) {
      auto it = std::lower_bound(tb.begin(), tb.end(), t);
      double best = std::numeric_limits<double>::infinity();
      if (it != tb.end()) best = std::min(best, std::abs(*it - t));
      if (it != tb.begin()) best = std::min(best, std::abs(*std::prev(it) - t));
      diffs.push_back(best);
    }
  }
  if (diffs.empty()) return 0.0;
  std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2, diffs.end());
  return diffs[diffs.size() / 2];
}

}  // namespace

IntervalSet assemble_intervals(const ScanResult& scan) {
  IntervalSet out;
  std::vector<double> all;
  for (const auto& node : scan.nodes) {
    if (node.degenerate || node.failed) continue;
    all.insert(all.end(), node.times.begin(), node.times.end());
  }
  if (all.empty()) return out;
  std::sort(all.begin(), all.end());

  out.gap_threshold = std::max(3.0 * empirical_variation(scan), 1e-6);
  Interval cur{all.front(), all.front()};
  for (double t : all) {
    if (t - cur.hi > out.gap_threshold) {
      out.intervals.push_back(cur);
      cur = {t, t};
    } else {
      cur.hi = t;
    }
  }
  out.intervals.push_back(cur);
  out.reaches_horizon = scan.horizon - out.intervals.back().hi <= out.gap_threshold;
  return out;
}

void label_branches(ScanResult& scan) {
  // Union-find over (node, time-index) pairs linked across grid edges.
  std::vector<int> offset(scan.nodes.size() + 1, 0);
  for (std::size_t i = 0; i < scan.nodes.size(); ++i)
    offset[i + 1] = offset[i] + static_cast<int>(scan.nodes[i].times.size());
  const int total = offset.back();
  std::vector<int> parent(total);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int x, int y) { parent[find(x)] = find(y); };

  const double match = std::max(3.0 * empirical_variation(scan), 1e-6);
  for (const auto& [a, b] : scan.grid.edges) {
    const auto& ta = scan.nodes[a].times;
    const auto& tb = scan.nodes[b].times;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      for (std::size_t j = 0; j < tb.size(); ++j) {
        if (std::abs(ta[i] - tb[j]) <= match)
          unite(offset[a] + static_cast<int>(i), offset[b] + static_cast<int>(j));
      }
    }
  }

  std::vector<int> label(total, -1);
  int next = 0;
  for (std::size_t i = 0; i < scan.nodes.size(); ++i) {
    auto& node = scan.nodes[i];
    node.branch.assign(node.times.size(), -1);
    for (std::size_t k = 0; k < node.times.size(); ++k) {
      const int root = find(offset[i] + static_cast<int>(k));
      if (label[root] < 0) label[root] = next++;
      node.branch[k] = label[root];
    }
  }
  scan.n_branches = next;
}

namespace {

// Events of Tr W - 2 inside a window around t_guess; the independent
// per-direction re-solve used by the continuation corrector.
std::optional<double> nearest_event_in_window(const LambdaSource& src, const Vec3& xi,
                                              double t_guess, double radius,
                                              const ScanOptions& opts) {
  const double t_hi = t_guess + radius;
  const ReducedSystem sys(src, WkbDirection::from_vector(xi));
  const WSolution w = evolve_w(sys, t_hi, opts.ode);
  EventTolerances tol = opts.events;
  tol.min_samples = std::max(tol.min_samples, 4000);
  const auto events = wkb_conjugate_times(w, tol, false);
  std::optional<double> best;
  for (const auto& e : events) {
    if (std::abs(e.t - t_guess) > radius) continue;
    if (!best || std::abs(e.t - t_guess) < std::abs(*best - t_guess)) best = e.t;
  }
  return best;
}

}  // namespace

std::vector<BranchPoint> continue_branch(const LambdaSource& source, const Vec3& xi_start,
                                         double t_start, const Vec3& dir, double dy,
                                         int n_steps, const ScanOptions& opts) {
  const Vec3 xi0 = xi_start.normalized();
  Vec3 d = (dir - dir.dot(xi0) * xi0).normalized();

  auto xi_at = [&](double y) { return Vec3(std::cos(y) * xi0 + std::sin(y) * d); };
  auto w_solution = [&](double y, double t_hi) {
    return evolve_w(ReducedSystem(source, WkbDirection::from_vector(xi_at(y))), t_hi,
                    opts.ode);
  };

  {
    const WSolution w0 = w_solution(0.0, t_start * (1.0 + 1e-6) + 1e-9);
    if (std::abs(w0.trace_w(t_start) - 2.0) > 1e-10)
      throw std::invalid_argument("continuation start does not satisfy Tr W = 2");
  }

  std::vector<BranchPoint> branch;
  branch.push_back({0.0, xi0, t_start, t_start});

  double y = 0.0, t = t_start;
  for (int step = 0; step < n_steps; ++step) {
    // Predictor slope dt/dy from the implicit function theorem; partials of
    // Tr W in y by central differences of independent solves.
    const double margin = std::max(1.0, 0.1 * t);
    const WSolution wc = w_solution(y, t + margin);
    const double g_t = wc.dtrace_dt(t);

    const double delta = 1e-5;
    const double trp = w_solution(y + delta, t + margin).trace_w(t);
    const double trm = w_solution(y - delta, t + margin).trace_w(t);
    const double g_y = (trp - trm) / (2.0 * delta);

    double slope;
    const Mat2 wmat = wc.w(t);
    if ((wmat - Mat2::Identity()).norm() < opts.events.tangent_norm_tol) {
      // Identity contact: Tr W - 2 has a critical point in both variables;
      // the admissible slopes solve a_tt (dt/dy)^2 + 2 b (dt/dy) + a_yy = 0,
      // with the second derivatives reduced to dW/dt and dW/dy products.
      const Mat2 wt = -rotation_j() * wc.theta(t) * wmat;
      const Mat2 wy = (w_solution(y + delta, t + margin).w(t) -
                       w_solution(y - delta, t + margin).w(t)) /
                      (2.0 * delta);
      const double att = -2.0 * wt.determinant();
      const double ayy = -2.0 * wy.determinant();
      const double b = (wt * wy).trace();
      const double disc = b * b - att * ayy;
      if (disc < 0.0 || att == 0.0)
        throw BranchLost("no real continuation slope at identity contact");
      const double r1 = (-b + std::sqrt(disc)) / att;
      const double r2 = (-b - std::sqrt(disc)) / att;
      slope = std::abs(r1) <= std::abs(r2) ? r1 : r2;
    } else {
      if (std::abs(g_t) < 1e-14) throw BranchLost("vanishing time derivative of Tr W");
      slope = -g_y / g_t;
    }

    y += dy;
    const double t_pred = t + slope * dy;

    // Corrector: re-localize on the new direction, widening the window up to
    // five times before reporting the branch lost.
    double radius = std::max({5.0 * std::abs(slope * dy), 1e-3, 100.0 * opts.events.time_tol});
    std::optional<double> corrected;
    for (int attempt = 0; attempt < 5 && !corrected; ++attempt) {
      corrected = nearest_event_in_window(source, xi_at(y), t_pred, radius, opts);
      radius *= 2.0;
    }
    if (!corrected) throw BranchLost("corrector failed to re-localize Tr W = 2");
    t = *corrected;
    branch.push_back({y, xi_at(y), t, t_pred});
  }
  return branch;
}

std::vector<SummaryRow> first_epiconjugate_summary(const std::vector<Vec3>& points,
                                                   const VectorField& u, const Metric& g,
                                                   const Chart& chart,
                                                   const ScanOptions& opts) {
  std::vector<SummaryRow> rows;
  rows.reserve(points.size());
  for (const Vec3& x : points) {
    SummaryRow row;
    row.x = x;
    const LambdaSource src = LambdaSource::from_field(u, g, chart, x);

    ScanOptions scan_opts = opts;
    scan_opts.first_only = true;
    const ScanResult scan = scan_sphere(src, scan_opts);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& node : scan.nodes) {
      if (node.degenerate || node.failed || node.times.empty()) continue;
      best = std::min(best, node.times.front());
    }
    if (std::isfinite(best)) row.wkb_first = best;

    if (const auto full = first_conjugate_time_full(src, opts.horizon, opts.ode, opts.events))
      row.full_first = full->t;

    if (row.wkb_first && row.full_first)
      row.inequality_ok = *row.wkb_first >= *row.full_first - 1e-6;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wkbconj
