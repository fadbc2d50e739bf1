#include "wkbconj/icosphere.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace wkbconj {

namespace {

struct Tri {
  int a, b, c;
};

// Lower-ring vertices are exact negations of upper-ring vertices so that
// antipodal pairing is bitwise exact; subdivision midpoints inherit this.
std::vector<Vec3> base_vertices() {
  const double zc = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  std::vector<Vec3> v;
  v.reserve(12);
  v.emplace_back(0.0, 0.0, 1.0);  // 0: north
  for (int i = 0; i < 5; ++i) {   // 1..5: upper ring
    const double a = 2.0 * std::numbers::pi * i / 5.0;
    v.emplace_back(r * std::cos(a), r * std::sin(a), zc);
  }
  for (int m = 0; m < 5; ++m)  // 6..10: lower ring, longitude 36 + 72 m degrees
    v.push_back(-v[1 + (m + 3) % 5]);
  v.push_back(-v[0]);  // 11: south
  return v;
}

std::vector<Tri> base_faces() {
  std::vector<Tri> f;
  f.reserve(20);
  for (int i = 0; i < 5; ++i) {
    const int u0 = 1 + i, u1 = 1 + (i + 1) % 5;
    const int l0 = 6 + i, l1 = 6 + (i + 1) % 5;
    f.push_back({0, u0, u1});
    f.push_back({u0, l0, u1});
    f.push_back({l0, l1, u1});
    f.push_back({11, l1, l0});
  }
  return f;
}

}  // namespace

SphereGrid build_icosphere(int level) {
  if (level < 0 || level > 8) throw std::invalid_argument("icosphere level out of range");

  std::vector<Vec3> verts = base_vertices();
  std::vector<Tri> faces = base_faces();

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Vec3 m = (verts[a] + verts[b]).normalized();
      verts.push_back(m);
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Tri> next;
    next.reserve(4 * faces.size());
    for (const Tri& t : faces) {
      const int ab = mid(t.a, t.b), bc = mid(t.b, t.c), ca = mid(t.c, t.a);
      next.push_back({t.a, ab, ca});
      next.push_back({ab, t.b, bc});
      next.push_back({ca, bc, t.c});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  SphereGrid grid;
  grid.level = level;
  grid.nodes = std::move(verts);
  const int n = grid.size();

  grid.theta.resize(n);
  grid.phi.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec3& v = grid.nodes[i];
    grid.theta[i] = std::acos(std::clamp(v.z(), -1.0, 1.0));
    double p = std::atan2(v.y(), v.x());
    if (p < 0.0) p += 2.0 * std::numbers::pi;
    grid.phi[i] = (v.x() == 0.0 && v.y() == 0.0) ? 0.0 : p;
  }

  std::map<std::pair<int, int>, bool> seen;
  for (const Tri& t : faces) {
    for (auto [a, b] : {std::pair{t.a, t.b}, std::pair{t.b, t.c}, std::pair{t.c, t.a}}) {
      const auto key = std::minmax(a, b);
      if (!seen.emplace(key, true).second) continue;
      grid.edges.push_back(key);
    }
  }

  // Antipode lookup via quantized coordinates; pairs are exact by
  // construction, the quantization only keys the map.
  std::map<std::array<long long, 3>, int> where;
  auto quantize = [](const Vec3& v) {
    return std::array<long long, 3>{std::llround(v.x() * 1e9), std::llround(v.y() * 1e9),
                                    std::llround(v.z() * 1e9)};
  };
  for (int i = 0; i < n; ++i) where[quantize(grid.nodes[i])] = i;
  grid.antipode.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto it = where.find(quantize(Vec3(-grid.nodes[i])));
    if (it == where.end()) throw std::logic_error("icosphere lost antipodal symmetry");
    grid.antipode[i] = it->second;
  }
  return grid;
}

}  // namespace wkbconj
