#include "phyot/kalman.hpp"

#include <cmath>

#include "phyot/error.hpp"

namespace phyot {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::NumericalSingularity: return "numerical-singularity";
    case ErrorCode::DegenerateTemplate: return "degenerate-template";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::DuplicateFrame: return "duplicate-frame";
    case ErrorCode::Ordering: return "ordering";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

namespace {

constexpr double kMaxConditionNumber = 1e12;

void require_finite(const Matrix4& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + " has non-finite entries");
  }
}

void require_covariance(const Matrix4& m, const char* what) {
  require_finite(m, what);
  if (!is_valid_covariance(m)) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + " is not symmetric PSD");
  }
}

void require_model(const MotionModel& model) {
  require_finite(model.A, "transition matrix");
  if (!model.B.allFinite()) {
    throw Error(ErrorCode::InvalidInput, "control matrix has non-finite entries");
  }
  require_covariance(model.Q, "process noise");
  require_covariance(model.R, "measurement noise");
}

Matrix4 symmetrized(const Matrix4& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

bool StateVector::finite() const {
  return std::isfinite(px) && std::isfinite(py) && std::isfinite(vx) && std::isfinite(vy);
}

bool Acceleration::finite() const { return std::isfinite(ax) && std::isfinite(ay); }

MotionModel::MotionModel()
    : MotionModel(default_process_noise(), default_measurement_noise()) {}

MotionModel::MotionModel(const Matrix4& process_noise, const Matrix4& measurement_noise)
    : A(transition()), B(control()), Q(process_noise), R(measurement_noise) {}

Matrix4 MotionModel::transition() {
  Matrix4 a;
  a << 1, 0, 1, 0,
       0, 1, 0, 1,
       0, 0, 1, 0,
       0, 0, 0, 1;
  return a;
}

Matrix42 MotionModel::control() {
  Matrix42 b;
  b << 0, 0,
       0, 0,
       1, 0,
       0, 1;
  return b;
}

Matrix4 MotionModel::default_process_noise() { return 1e-2 * Matrix4::Identity(); }

Matrix4 MotionModel::default_measurement_noise() {
  return Vector4(1.0, 1.0, 0.25, 0.25).asDiagonal();
}

double symmetry_error(const Matrix4& cov) {
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), 1e-300);
  return (cov - cov.transpose()).cwiseAbs().maxCoeff() / scale;
}

double min_eigenvalue(const Matrix4& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(symmetrized(cov), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_valid_covariance(const Matrix4& cov, double tol) {
  if (!cov.allFinite()) return false;
  if (cov.isZero(0.0)) return true;
  if (symmetry_error(cov) > tol) return false;
  return min_eigenvalue(cov) >= -tol * std::abs(cov.trace());
}

StateEstimate predict(const StateEstimate& prev, const Acceleration& accel,
                      const MotionModel& model) {
  if (!prev.state.finite() || !accel.finite()) {
    throw Error(ErrorCode::InvalidInput, "predict: non-finite state or acceleration");
  }
  require_finite(prev.cov, "state covariance");
  require_model(model);

  const Vector4 x = model.A * prev.state.to_eigen() + model.B * Eigen::Vector2d(accel.ax, accel.ay);
  StateEstimate out;
  out.state = StateVector::from_eigen(x);
  out.cov = symmetrized(model.A * prev.cov * model.A.transpose() + model.Q);
  out.frame_index = prev.frame_index + 1;
  return out;
}

Matrix4 gain(const Matrix4& prior_cov, const MotionModel& model) {
  require_finite(prior_cov, "prior covariance");
  require_finite(model.R, "measurement noise");

  const Matrix4 innovation_cov = prior_cov + model.R;
  if (innovation_cov.isZero(0.0)) {
    return Matrix4::Identity();
  }

  Eigen::JacobiSVD<Matrix4> svd(innovation_cov);
  const auto& sv = svd.singularValues();
  if (sv(3) <= 0.0 || sv(0) / sv(3) > kMaxConditionNumber) {
    throw Error(ErrorCode::NumericalSingularity,
                "gain: prior covariance + R is singular (condition number above 1e12)");
  }

  // K S = P with S symmetric, so K^T = S^-1 P^T.
  const Matrix4 k = innovation_cov.partialPivLu().solve(prior_cov.transpose()).transpose();
  if (!k.allFinite()) {
    throw Error(ErrorCode::NumericalSingularity, "gain: non-finite entries");
  }
  return k;
}

StateEstimate update(const StateEstimate& prior, const StateVector& obs,
                     const MotionModel& model) {
  if (!prior.state.finite() || !obs.finite()) {
    throw Error(ErrorCode::InvalidInput, "update: non-finite state or observation");
  }
  const Matrix4 k = gain(prior.cov, model);
  const Vector4 x = prior.state.to_eigen();

  StateEstimate out;
  out.state = StateVector::from_eigen(x + k * (obs.to_eigen() - x));
  out.cov = symmetrized((Matrix4::Identity() - k) * prior.cov);
  out.frame_index = prior.frame_index;
  return out;
}

StateEstimate step(const StateEstimate& prev, const Acceleration& accel,
                   const std::optional<StateVector>& obs, const MotionModel& model) {
  StateEstimate prior = predict(prev, accel, model);
  if (!obs) return prior;
  return update(prior, *obs, model);
}

}  // namespace phyot
