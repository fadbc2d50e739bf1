// Randomized closed-form pullback paths and directions for property checks:
// smooth trigonometric SPD perturbations of the identity with Lambda(0) = id.
#pragma once

#include <random>

#include "wkbconj/wkb.hpp"

namespace wkbconj {

struct SyntheticSystem {
  LambdaSource source;
  WkbDirection direction;
  double c = 0.0;
};

// Lambda(t) = L(t)^T L(t) with L(t) = id + sum_m (sin(nu_m t + ph_m) - sin(ph_m)) C_m,
// total amplitude below 0.4 so L stays invertible; omega and xi random with
// |<omega, xi>| >= c_min.
SyntheticSystem random_spd_system(std::mt19937& rng, double amplitude = 0.35,
                                  double c_min = 0.1);

// Random positive scalar coefficient path a(t) (possibly large oscillation).
std::function<double(double)> random_positive_coefficient(std::mt19937& rng,
                                                          double max_amplitude = 50.0);

Vec3 random_unit(std::mt19937& rng);

}  // namespace wkbconj
