// Pointwise Jacobi-type operators along a flow: the full 3x3 solution
// operator of
//     d/dt(Lambda(t) du/dt) + omega0 x du/dt = 0,
// the reduced 2x2 momentum system over a WKB direction xi0,
//     dW/dt + <omega0, xi0> J (pi Lambda pi)^{-1} W = 0,
// and the detection of conjugate events (det = 0, Tr W = 2).
//
// Everything is expressed in a fixed orthonormal frame at the base point, so
// the linear algebra here is Euclidean.  For field-backed problems the flow
// and its Jacobian are co-integrated in the same state vector; Lambda is never
// interpolated separately from the operator it drives.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "wkbconj/chart.hpp"
#include "wkbconj/field.hpp"
#include "wkbconj/metric.hpp"
#include "wkbconj/ode45.hpp"

namespace wkbconj {

struct FieldContext {
  VectorField u;
  Metric g;
  Chart chart;
  Vec3 x0 = Vec3::Zero();
  Mat3 frame = Mat3::Identity();  // columns e1,e2,e3 at x0
  Mat3 g0 = Mat3::Identity();
  Vec3 omega_frame = Vec3::Zero();
};

// Source of the pullback path Lambda(t) plus the vorticity at the base point.
// Closed-form sources evaluate Lambda(t) directly; field sources carry the
// data needed to co-integrate the flow.
class LambdaSource {
 public:
  static LambdaSource identity(const Vec3& omega_frame);
  static LambdaSource from_function(std::function<Mat3(double)> lambda,
                                    const Vec3& omega_frame);
  static LambdaSource from_field(const VectorField& u, const Metric& g,
                                 const Chart& chart, const Vec3& x0);

  bool field_backed() const { return field_ != nullptr; }
  const FieldContext& field() const { return *field_; }
  Mat3 lambda(double t) const { return closed_(t); }  // closed-form only
  const Vec3& omega() const { return omega_; }

 private:
  std::function<Mat3(double)> closed_;
  std::shared_ptr<const FieldContext> field_;
  Vec3 omega_ = Vec3::Zero();
};

// Unit direction xi0 with the orthonormal complement (xi1, xi2) built from
// spherical angles: xi0 = (sin th cos ph, sin th sin ph, cos th).
// (xi0, xi1, xi2) is right handed, so xi1 x xi2 = xi0.
struct WkbDirection {
  Vec3 xi0 = Vec3::UnitZ();
  Vec3 xi1 = Vec3::UnitX();
  Vec3 xi2 = Vec3::UnitY();
  double theta = 0.0, phi = 0.0;

  static WkbDirection from_angles(double theta, double phi);
  static WkbDirection from_vector(const Vec3& xi0_unit);
  WkbDirection antipode() const { return from_vector(-xi0); }
};

// 2x2 restriction [<xi_i, lambda xi_j>], i,j in {1,2}.
Mat2 pi_lambda_pi(const Mat3& lambda, const WkbDirection& dir);

// Theta(t) = c (pi Lambda pi)^{-1} with c = <omega0, xi0>.  Throws
// DegenerateDirection when c = 0 (the trace criterion does not apply there).
class ReducedSystem {
 public:
  ReducedSystem(const LambdaSource& source, const WkbDirection& dir);

  double c() const { return c_; }
  const WkbDirection& direction() const { return dir_; }
  const LambdaSource& source() const { return src_; }

  Mat2 pi_lambda_pi(double t) const;  // closed-form sources only
  Mat2 theta(double t) const { return c_ * pi_lambda_pi(t).inverse(); }

 private:
  LambdaSource src_;
  WkbDirection dir_;
  double c_ = 0.0;
};

class WSolution;

namespace detail {
// Reduced momentum solve without the c != 0 gate; the amplitude-transport
// equation is regular at c = 0 even though the trace criterion is not.
WSolution evolve_momentum(const LambdaSource& src, const WkbDirection& dir, double c,
                          double t_max, const OdeOptions& opts);
}  // namespace detail

// Co-integrated pair: W (momentum operator, W(0) = id, det W = 1) and S
// (solution operator, S(0) = 0, S'(0) = id, W = pi Lambda pi dS/dt).
class WSolution {
 public:
  Mat2 w(double t) const;
  Mat2 s(double t) const;
  Mat2 pi_lambda_pi(double t) const;
  Mat2 theta(double t) const { return c_ * pi_lambda_pi(t).inverse(); }

  double trace_w(double t) const { return w(t).trace(); }
  double det_w(double t) const { return w(t).determinant(); }
  // d/dt Tr W = -Tr(J Theta W), evaluated algebraically.
  double dtrace_dt(double t) const;
  double det_s(double t) const { return s(t).determinant(); }
  double ddet_s_dt(double t) const;

  double t_end() const { return sol_.t_end(); }
  double c() const { return c_; }
  const WkbDirection& direction() const { return dir_; }

  // Co-integrated flow data; field-backed solutions only.
  Vec3 eta(double t) const;
  Mat3 d_eta(double t) const;
  bool field_backed() const { return field_backed_; }

 private:
  friend WSolution detail::evolve_momentum(const LambdaSource&, const WkbDirection&,
                                           double, double, const OdeOptions&);
  DenseSolution sol_;
  LambdaSource src_;
  WkbDirection dir_;
  double c_ = 0.0;
  bool field_backed_ = false;
  Eigen::Matrix<double, 3, 2> m2_;  // frame * [xi1 xi2], field-backed case
  int off_w_ = 0, off_s_ = 4;
};

WSolution evolve_w(const ReducedSystem& sys, double t_max, const OdeOptions& opts = {});

// Full 3x3 solution operator with its momentum P = Lambda dU/dt.
class FullOpSolution {
 public:
  Mat3 op(double t) const;
  Mat3 momentum(double t) const;
  Mat3 op_dot(double t) const;  // Lambda^{-1} P
  Mat3 lambda(double t) const;
  double det_op(double t) const { return op(t).determinant(); }
  double ddet_dt(double t) const;  // Tr(adj(U) U')
  // P + omega x U - id; identically zero for exact solutions.
  Mat3 conservation_residual(double t) const;

  double t_end() const { return sol_.t_end(); }
  const Vec3& omega() const { return src_.omega(); }

 private:
  friend FullOpSolution solve_full_operator(const LambdaSource&, double, const OdeOptions&);
  DenseSolution sol_;
  LambdaSource src_;
  bool field_backed_ = false;
  int off_u_ = 0, off_p_ = 9;
};

FullOpSolution solve_full_operator(const LambdaSource& source, double t_max,
                                   const OdeOptions& opts = {});

// --------------------------------------------------------------------------
// Event detection

struct EventTolerances {
  double sample_dt_cap = 0.01;   // dense sampling step = min(cap, t_max/min_samples)
  int min_samples = 2000;
  double time_tol = 1e-10;       // bisection bracket width
  double tangent_value_tol = 1e-8;   // |g| acceptance at a touching extremum
  double tangent_norm_tol = 1e-6;    // ||W - id||_F classification threshold
  double tangent_scale_window = 0.0; // scale |g| tolerance by the local sample max
};

enum class EventMode { DetZero3D, TraceCrossing, TangentialContact };
const char* to_string(EventMode mode);

struct ConjugateEvent {
  double t = 0.0;
  EventMode mode = EventMode::TraceCrossing;
  Vec2 kernel2 = Vec2::Zero();  // null direction of S (reduced events)
  Vec3 kernel3 = Vec3::Zero();  // null direction of the 3x3 operator
  std::optional<WkbDirection> direction;
};

// All t in (0, t_max] with Tr W(t) = 2.  Transversal crossings are bracketed
// by sign changes of Tr W - 2; tangential contacts (no sign change) are found
// as zeros of d/dt Tr W with |Tr W - 2| below tolerance and flagged
// TangentialContact when additionally W is the identity there.
std::vector<ConjugateEvent> wkb_conjugate_times(const WSolution& w,
                                                const EventTolerances& tol = {},
                                                bool first_only = false);

// max |det W(t) - 1| over the event sampling grid.
double det_w_drift(const WSolution& w, const EventTolerances& tol = {});

// Zeros of the smallest singular value of S (equivalently det S = 0).
std::vector<double> s_singular_times(const WSolution& w, const EventTolerances& tol = {});

// Zeros of det U(t) in (0, t_max], including touching (double) zeros.
std::vector<ConjugateEvent> full_conjugate_times(const FullOpSolution& u,
                                                 const EventTolerances& tol = {},
                                                 bool first_only = false);
std::optional<ConjugateEvent> first_conjugate_time_full(const LambdaSource& source,
                                                        double t_max,
                                                        const OdeOptions& opts = {},
                                                        const EventTolerances& tol = {});

// --------------------------------------------------------------------------
// Dimension-two reduction

// For a positive scalar coefficient a(t), d/dt(a f') = 0 forces
// f(t) = f'(0) int_0^t ds/a(s), which is strictly monotone; certifies that the
// two-dimensional reduced equation admits no solution vanishing twice.
struct TwoDimCertificate {
  double min_coefficient = 0.0;
  double monotone_increment = 0.0;  // int_0^{t_max} ds/a(s)
  bool no_vanishing = false;
};
TwoDimCertificate two_dim_degeneracy_check(const std::function<double(double)>& coeff,
                                           double t_max, int samples = 4000);

}  // namespace wkbconj
