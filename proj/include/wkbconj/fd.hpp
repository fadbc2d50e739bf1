// Fourth-order central differences, the fallback when no analytic derivative
// is available.
#pragma once

namespace wkbconj::fd {

inline constexpr double kStep = 1e-5;

template <class F>
double derivative(F&& f, double x, double h = kStep) {
  return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
}

}  // namespace wkbconj::fd
