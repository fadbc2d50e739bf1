// Adaptive Dormand-Prince 5(4) integration with quartic dense output
// (coefficients of Hairer, Norsett and Wanner, Solving ODEs I).
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "wkbconj/types.hpp"

namespace wkbconj {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 = automatic
  double max_step = 0.0;      // 0 = unrestricted
  long max_steps = 5'000'000;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Piecewise-quartic interpolant over the accepted steps.
class DenseSolution {
 public:
  struct Segment {
    double t0, t1;
    Eigen::VectorXd r1, r2, r3, r4, r5;
  };

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  int dimension() const { return dim_; }

  void eval(double t, Eigen::VectorXd& out) const;
  Eigen::VectorXd operator()(double t) const {
    Eigen::VectorXd out(dim_);
    eval(t, out);
    return out;
  }

  const std::vector<Segment>& segments() const { return segments_; }

 private:
  friend DenseSolution integrate_dense(const OdeRhs&, Eigen::VectorXd, double, double,
                                       const OdeOptions&);
  std::vector<Segment> segments_;
  double t_begin_ = 0.0, t_end_ = 0.0;
  int dim_ = 0;
};

// Integrates y' = f(t, y) from t0 to t1 (t1 > t0).  Throws StepFailure when
// the controller cannot make progress within tolerance.
DenseSolution integrate_dense(const OdeRhs& f, Eigen::VectorXd y0, double t0, double t1,
                              const OdeOptions& opts = {});

}  // namespace wkbconj
