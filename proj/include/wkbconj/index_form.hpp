// Smallest eigenvalue of the second-variation quadratic form
//   I_T(f,g) = int_0^T  L11 f'^2 + 2 L12 f' g' + L22 g'^2 + 2 w0 f g'  dt
// over piecewise-linear (f, g) vanishing at 0 and T, relative to the L^2 mass.
// The sign of the eigenvalue locates T against the first conjugate time.
#pragma once

#include <functional>

#include "wkbconj/types.hpp"

namespace wkbconj {

struct IndexFormOptions {
  int elements = 400;
  double eig_tol = 1e-9;  // absolute bisection width on the eigenvalue
};

struct IndexFormResult {
  double lambda = 0.0;
  double residual = 0.0;  // ||K v - lambda M v|| / ||v|| for the polished pair
  int factorizations = 0;
};

// lambda_tilde(t) must be symmetric positive definite on [0, T].
// Throws EigSolveFailure when the factorization-based bisection breaks down.
IndexFormResult index_form_lambda(const std::function<Mat2(double)>& lambda_tilde,
                                  double omega_tilde, double T,
                                  const IndexFormOptions& opts = {});

}  // namespace wkbconj
