#include "wkbconj/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wkbconj {

std::string format_sci(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string trajectory_csv(const FlowSolution& flow, const std::vector<double>& times) {
  std::ostringstream out;
  out << "t,eta1,eta2,eta3";
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) out << ",Deta" << i << j;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) out << ",Lam" << i << j;
  out << "\n";
  for (double t : times) {
    const Vec3 eta = flow.eta(t);
    const Mat3 deta = flow.d_eta(t);
    const Mat3 lam = flow.lambda_frame(t);
    out << format_sci(t);
    for (int i = 0; i < 3; ++i) out << "," << format_sci(eta[i]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out << "," << format_sci(deta(i, j));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out << "," << format_sci(lam(i, j));
    out << "\n";
  }
  return out.str();
}

std::string surface_csv(const ScanResult& scan) {
  std::ostringstream out;
  out << "theta,phi,xi1,xi2,xi3,branch_id,t\n";
  for (int i = 0; i < scan.grid.size(); ++i) {
    const NodeScan& node = scan.nodes[i];
    if (node.degenerate || node.failed) continue;
    const Vec3& xi = scan.grid.nodes[i];
    for (std::size_t k = 0; k < node.times.size(); ++k) {
      out << format_sci(scan.grid.theta[i]) << "," << format_sci(scan.grid.phi[i]) << ","
          << format_sci(xi[0]) << "," << format_sci(xi[1]) << "," << format_sci(xi[2]) << ","
          << node.branch[k] << "," << format_sci(node.times[k]) << "\n";
    }
  }
  return out.str();
}

namespace {

std::string vec3_json(const Vec3& v) {
  return "[" + format_sci(v[0]) + ", " + format_sci(v[1]) + ", " + format_sci(v[2]) + "]";
}

}  // namespace

std::string intervals_json(const Vec3& x, double horizon, const IntervalSet& set) {
  std::ostringstream out;
  out << "{\n  \"x\": " << vec3_json(x) << ",\n  \"horizon\": " << format_sci(horizon)
      << ",\n  \"intervals\": [";
  for (std::size_t i = 0; i < set.intervals.size(); ++i) {
    if (i) out << ", ";
    out << "[" << format_sci(set.intervals[i].lo) << ", " << format_sci(set.intervals[i].hi)
        << "]";
  }
  out << "],\n  \"reaches_horizon\": " << (set.reaches_horizon ? "true" : "false")
      << "\n}\n";
  return out.str();
}

std::string directions_json(const Vec3& x, const ScanResult& scan) {
  std::ostringstream out;
  out << "[\n";
  bool first = true;
  for (int i = 0; i < scan.grid.size(); ++i) {
    const NodeScan& node = scan.nodes[i];
    if (!first) out << ",\n";
    first = false;
    out << "{\"x\": " << vec3_json(x) << ", \"theta\": " << format_sci(scan.grid.theta[i])
        << ", \"phi\": " << format_sci(scan.grid.phi[i]) << ", \"c\": " << format_sci(node.c)
        << ", \"degenerate\": " << (node.degenerate ? "true" : "false")
        << ", \"failed\": " << (node.failed ? "true" : "false") << ", \"events\": [";
    for (std::size_t k = 0; k < node.times.size(); ++k) {
      if (k) out << ", ";
      out << "{\"t\": " << format_sci(node.times[k]) << ", \"mode\": \""
          << to_string(node.modes[k]) << "\"}";
    }
    out << "], \"det_W_drift\": " << format_sci(node.det_w_drift)
        << ", \"horizon\": " << format_sci(scan.horizon) << "}";
  }
  out << "\n]\n";
  return out.str();
}

std::string first_csv(const std::vector<FirstRow>& rows) {
  std::ostringstream out;
  out << "x1,x2,x3,t,kernel1,kernel2,kernel3,status\n";
  for (const FirstRow& r : rows) {
    for (int i = 0; i < 3; ++i) out << format_sci(r.x[i]) << ",";
    if (r.ok) {
      out << format_sci(r.t) << "," << format_sci(r.kernel[0]) << ","
          << format_sci(r.kernel[1]) << "," << format_sci(r.kernel[2]) << ",ok\n";
    } else {
      out << ",,,," << (r.failed ? "failed" : "none") << "\n";
    }
  }
  return out.str();
}

}  // namespace wkbconj
