#include "wkbconj/synthetic.hpp"

#include <cmath>

namespace wkbconj {

Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

SyntheticSystem random_spd_system(std::mt19937& rng, double amplitude, double c_min) {
  std::uniform_real_distribution<double> u(0.0, 1.0);

  struct Term {
    Mat3 c;
    double nu, ph;
  };
  std::vector<Term> terms(3);
  double budget = amplitude;
  for (auto& term : terms) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.data()[i] = 2.0 * u(rng) - 1.0;
    const double a = budget / 3.0 * (0.5 + 0.5 * u(rng));
    term.c = m * (a / m.norm());
    term.nu = 0.3 + 1.2 * u(rng);
    term.ph = 2.0 * std::numbers::pi * u(rng);
  }

  auto lambda = [terms](double t) {
    Mat3 l = Mat3::Identity();
    for (const auto& term : terms)
      l += (std::sin(term.nu * t + term.ph) - std::sin(term.ph)) * term.c;
    return Mat3(l.transpose() * l);
  };

  SyntheticSystem sys;
  const double mag = 0.5 + 1.5 * u(rng);
  Vec3 omega, xi;
  do {
    omega = mag * random_unit(rng);
    xi = random_unit(rng);
  } while (std::abs(omega.dot(xi)) < c_min * omega.norm());
  if (u(rng) < 0.5) omega = -omega;  // both signs of c occur

  sys.source = LambdaSource::from_function(lambda, omega);
  sys.direction = WkbDirection::from_vector(xi);
  sys.c = omega.dot(xi);
  return sys;
}

std::function<double(double)> random_positive_coefficient(std::mt19937& rng,
                                                          double max_amplitude) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double a1 = max_amplitude * u(rng);
  const double a2 = max_amplitude * u(rng);
  const double w1 = 0.2 + 3.0 * u(rng), w2 = 0.2 + 3.0 * u(rng);
  const double p1 = 6.28 * u(rng), p2 = 6.28 * u(rng);
  const double floor = 0.05 + u(rng);
  return [=](double t) {
    return floor + a1 * (1.0 + std::sin(w1 * t + p1)) + a2 * (1.0 + std::cos(w2 * t + p2));
  };
}

}  // namespace wkbconj
