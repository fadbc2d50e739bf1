// A single coordinate box, with optional periodic directions.
#pragma once

#include <array>
#include <random>

#include "wkbconj/types.hpp"

namespace wkbconj {

struct Chart {
  Vec3 lo{-1.0, -1.0, -1.0};
  Vec3 hi{1.0, 1.0, 1.0};
  std::array<bool, 3> periodic{false, false, false};

  double span(int i) const { return hi[i] - lo[i]; }

  // Periodic directions always pass; box directions get a small tolerance.
  bool contains(const Vec3& x, double tol = 1e-9) const {
    for (int i = 0; i < 3; ++i) {
      if (periodic[i]) continue;
      const double m = tol * (1.0 + std::abs(span(i)));
      if (x[i] < lo[i] - m || x[i] > hi[i] + m) return false;
    }
    return true;
  }

  // Wraps periodic coordinates into [lo, hi).
  Vec3 wrap(Vec3 x) const {
    for (int i = 0; i < 3; ++i) {
      if (!periodic[i]) continue;
      const double s = span(i);
      x[i] = lo[i] + std::fmod(std::fmod(x[i] - lo[i], s) + s, s);
    }
    return x;
  }

  // Uniform sample in the box, shrunk by `margin` (fraction of the span) on
  // non-periodic sides.
  Vec3 sample(std::mt19937& rng, double margin = 0.0) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec3 x;
    for (int i = 0; i < 3; ++i) {
      const double m = periodic[i] ? 0.0 : margin;
      x[i] = lo[i] + span(i) * (m + (1.0 - 2.0 * m) * u(rng));
    }
    return x;
  }
};

}  // namespace wkbconj
