#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lagshrink {

using Vec4 = Eigen::Vector4d;
// Column k holds the ambient point (or vector) attached to grid node k.
using Field4 = Eigen::Matrix<double, 4, Eigen::Dynamic>;
using Scalar = Eigen::VectorXd;

enum class ErrorCode {
  InvalidArgument = 1,
  Io,
  Parse,
  DegenerateMetric,
  NotLagrangian,
  FrameDegenerate,
  NonIntegerPeriod,
  NotClosed,
  ProjectionDiverged,
  PreconditionViolated,
  NotCritical,
  MaxIterations,
  InsufficientSamples,
  MemoryGuard,
  StepRejected,
  NoSingularity,
  NotCauchy,
  NoDecreaseFound,
  ShootingFailed,
  NotShrinker,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline constexpr double kPi = 3.14159265358979323846;

// Multiplication by i on C^2 = R^4 with coordinates (x1, y1, x2, y2).
inline Vec4 apply_j(const Vec4& v) { return Vec4(-v[1], v[0], -v[3], v[2]); }

// Standard symplectic form dx1^dy1 + dx2^dy2; equals <J a, b>.
inline double omega(const Vec4& a, const Vec4& b) {
  return a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2];
}

}  // namespace lagshrink
