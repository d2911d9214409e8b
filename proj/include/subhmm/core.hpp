#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace subhmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Symbol and state indices are zero-based throughout the library. Files
/// and printed output use the same zero-based convention.
using Symbol = std::int32_t;

enum class ErrorCode {
  InvalidArgument,
  NotStochastic,
  NotErgodic,
  NumericalFailure,
  SingularCore,
  OrderTooLarge,
  DegenerateStates,
  NoConvergence,
  ConditionCViolated,
  ZeroLikelihood,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::NotErgodic: return "NotErgodic";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::SingularCore: return "SingularCore";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::DegenerateStates: return "DegenerateStates";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConditionCViolated: return "ConditionCViolated";
    case ErrorCode::ZeroLikelihood: return "ZeroLikelihood";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::InvalidArgument, what);
}

/// Spectral norm (largest singular value).
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

inline double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.eigenvalues().cwiseAbs().maxCoeff();
}

/// Integer power by repeated squaring.
inline Matrix matrix_power(const Matrix& m, int p) {
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (p > 0) {
    if (p & 1) result = result * base;
    base = base * base;
    p >>= 1;
  }
  return result;
}

}  // namespace detail
}  // namespace subhmm
