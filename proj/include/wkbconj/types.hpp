// Shared scalar/vector/matrix aliases and error types.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace wkbconj {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Rotation by +90 degrees, the symplectic unit of the reduced 2x2 system.
inline Mat2 rotation_j() {
  Mat2 j;
  j << 0.0, -1.0, 1.0, 0.0;
  return j;
}

// cross_matrix(a) * b == a x b (components in an oriented orthonormal frame).
inline Mat3 cross_matrix(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
      -a.y(), a.x(), 0.0;
  return m;
}

// Symmetric positive definiteness, decided by eigenvalues.
inline bool is_spd(const Mat3& m, double tol = 1e-10) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * (1.0 + m.cwiseAbs().maxCoeff()))
    return false;
  Eigen::SelfAdjointEigenSolver<Mat3> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > tol * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
}

struct WkbError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonSpdMetric : WkbError {
  using WkbError::WkbError;
};

struct DegenerateDirection : WkbError {
  using WkbError::WkbError;
};

struct TrajectoryLeftChart : WkbError {
  TrajectoryLeftChart(const std::string& what, double t_exit_)
      : WkbError(what), t_exit(t_exit_) {}
  double t_exit;
};

struct StepFailure : WkbError {
  using WkbError::WkbError;
};

struct GradientVanished : WkbError {
  using WkbError::WkbError;
};

struct BranchLost : WkbError {
  using WkbError::WkbError;
};

struct EigSolveFailure : WkbError {
  using WkbError::WkbError;
};

struct ConfigError : WkbError {
  using WkbError::WkbError;
};

}  // namespace wkbconj
