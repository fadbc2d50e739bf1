// Subdivided icosahedron, pole-aligned and exactly antipodally symmetric.
#pragma once

#include <utility>
#include <vector>

#include "wkbconj/types.hpp"

namespace wkbconj {

struct SphereGrid {
  std::vector<Vec3> nodes;  // unit vectors
  std::vector<double> theta, phi;
  std::vector<std::pair<int, int>> edges;  // triangulation edges, first < second
  std::vector<int> antipode;               // antipode[i] = index of -nodes[i]
  int level = 0;

  int size() const { return static_cast<int>(nodes.size()); }
  bool is_representative(int i) const { return i < antipode[i]; }
};

// 10 * 4^level + 2 nodes; level 4 gives 2562.  Vertices of level L are a
// prefix of the vertices of level L+1.
SphereGrid build_icosphere(int level);

}  // namespace wkbconj
