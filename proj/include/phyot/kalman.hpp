#pragma once

#include <Eigen/Dense>
#include <optional>

namespace phyot {

using Matrix4 = Eigen::Matrix4d;
using Matrix42 = Eigen::Matrix<double, 4, 2>;
using Vector4 = Eigen::Vector4d;

/// Augmented state [px, py, vx, vy]; pixels and pixels/frame.
struct StateVector {
  double px = 0.0;
  double py = 0.0;
  double vx = 0.0;
  double vy = 0.0;

  Vector4 to_eigen() const { return {px, py, vx, vy}; }
  static StateVector from_eigen(const Vector4& v) { return {v(0), v(1), v(2), v(3)}; }
  bool finite() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Control input of the motion model, pixels/frame^2.
struct Acceleration {
  double ax = 0.0;
  double ay = 0.0;

  bool finite() const;
  friend bool operator==(const Acceleration&, const Acceleration&) = default;
};

struct StateEstimate {
  StateVector state;
  Matrix4 cov = Matrix4::Zero();
  int frame_index = 0;
};

/// Linear-Gaussian model with unit timestep and full-state observation:
///   x_t = A x_{t-1} + B a_{t-1} + w,   w ~ N(0, Q)
///   z_t = x_t + nu,                    nu ~ N(0, R)
struct MotionModel {
  Matrix4 A;
  Matrix42 B;
  Matrix4 Q;
  Matrix4 R;

  /// Unit-timestep transition with Q = 1e-2 I and R = diag(1, 1, 0.25, 0.25).
  MotionModel();
  MotionModel(const Matrix4& process_noise, const Matrix4& measurement_noise);

  static Matrix4 transition();
  static Matrix42 control();
  static Matrix4 default_process_noise();
  static Matrix4 default_measurement_noise();
};

/// Symmetric to 1e-9 relative tolerance and PSD with eigenvalues >= -1e-9 * trace.
bool is_valid_covariance(const Matrix4& cov, double tol = 1e-9);
double symmetry_error(const Matrix4& cov);
double min_eigenvalue(const Matrix4& cov);

StateEstimate predict(const StateEstimate& prev, const Acceleration& accel,
                      const MotionModel& model);

/// K = P (P + R)^-1. Throws NumericalSingularity when P + R has condition
/// number above 1e12. When P + R is exactly zero both the prior and the
/// sensor claim certainty and the gain is I.
Matrix4 gain(const Matrix4& prior_cov, const MotionModel& model);

StateEstimate update(const StateEstimate& prior, const StateVector& obs,
                     const MotionModel& model);

/// predict, followed by update when an observation exists.
StateEstimate step(const StateEstimate& prev, const Acceleration& accel,
                   const std::optional<StateVector>& obs, const MotionModel& model);

}  // namespace phyot
