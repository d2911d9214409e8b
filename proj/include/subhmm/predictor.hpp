#pragma once

#include "subhmm/core.hpp"
#include "subhmm/hmm.hpp"
#include "subhmm/linalg.hpp"
#include "subhmm/moments.hpp"

#include <algorithm>
#include <memory>
#include <span>
#include <vector>

namespace subhmm {

/// Fixed point of the predictor Riccati recursion for the linear
/// state-space form of an HMM, and the derived innovation quantities.
struct GainSolution {
  Matrix K;       // n x ell Kalman gain
  Matrix V;       // n x n state prediction-error covariance
  Vector gamma;   // (A - KC) gamma = gamma, 1^T gamma = 1
  Matrix J;       // (A - KC) - gamma 1^T, stable
  int iterations = 0;
  double residual = 0.0;  // spectral norm of the last V update
};

/// Innovation covariance R + C V C^T.
inline Matrix innovation_covariance(const HmmModel& model, const StationaryInfo& info,
                                    const Matrix& v) {
  Matrix out = info.R + model.C() * v * model.C().transpose();
  return 0.5 * (out + out.transpose());
}

/// Iterates V <- A V A^T + Q - A V C^T (R + C V C^T)^+ C V A^T from V = S,
/// where Q = diag(pi) - A diag(pi) A^T. The innovation covariance has kernel
/// span(1_ell) and is inverted in structured form.
inline GainSolution riccati_gain(const HmmModel& model, double tol = 1e-12, int max_iter = 100000) {
  const auto info = stationary_info(model);
  const Matrix& A = model.A();
  const Matrix& C = model.C();
  const int n = model.n();
  const int l = model.ell();

  const Eigen::SelfAdjointEigenSolver<Matrix> r_eig(info.R, Eigen::EigenvaluesOnly);
  if (r_eig.eigenvalues()(1) < 1e-10)
    throw Error(ErrorCode::ConditionCViolated, "zero eigenvalue of R is not simple");

  const Matrix q = Matrix(info.pi.asDiagonal()) - A * info.pi.asDiagonal() * A.transpose();
  GainSolution sol;
  Matrix v = info.S;
  for (sol.iterations = 1; sol.iterations <= max_iter; ++sol.iterations) {
    const Matrix inn_pinv = structured_pinv(innovation_covariance(model, info, v), l, 1);
    const Matrix avc = A * v * C.transpose();
    Matrix next = A * v * A.transpose() + q - avc * inn_pinv * avc.transpose();
    next = 0.5 * (next + next.transpose());
    sol.residual = detail::spectral_norm(next - v);
    v = std::move(next);
    if (sol.residual < tol) break;
  }
  if (sol.iterations > max_iter)
    throw Error(ErrorCode::NoConvergence,
                "Riccati iteration stalled at step size " + std::to_string(sol.residual));

  sol.V = v;
  sol.K = A * v * C.transpose() * structured_pinv(innovation_covariance(model, info, v), l, 1);

  const Matrix closed = A - sol.K * C;
  Matrix bordered(n + 1, n);
  bordered.topRows(n) = closed - Matrix::Identity(n, n);
  bordered.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  sol.gamma = bordered.colPivHouseholderQr().solve(rhs);
  sol.J = closed - sol.gamma * RowVector::Ones(n);
  return sol;
}

/// (A, C, K, mean) of an innovation-form linear predictor, either the true
/// system or one estimated from data.
struct LinearSystem {
  Matrix A;
  Matrix C;
  Matrix K;
  Vector meanY;
  Matrix closedLoop;  // A - K C
  bool affine = false;  // estimated basis: last state coordinate is the constant 1

  LinearSystem(Matrix a, Matrix c, Matrix k, Vector mean, bool affine_basis = false)
      : A(std::move(a)), C(std::move(c)), K(std::move(k)), meanY(std::move(mean)),
        closedLoop(A - K * C), affine(affine_basis) {}

  /// Stored state for an empty history: zero, or e_n in the affine basis.
  Vector origin() const {
    Vector v = Vector::Zero(A.rows());
    if (affine) v(v.size() - 1) = 1.0;
    return v;
  }
};

inline LinearSystem true_linear_system(const HmmModel& model, const GainSolution& gain) {
  return LinearSystem(model.A(), model.C(), gain.K, stationary_info(model).meanY);
}

/// State of the recursive linear predictor: the centered sum
/// sum_j (A - KC)^j K (y_{t-j} - mean) over the symbols absorbed so far,
/// plus origin() (so estimated-basis states carry their affine 1).
class PredictorState {
 public:
  explicit PredictorState(std::shared_ptr<const LinearSystem> system)
      : system_(std::move(system)), xbar_(system_->origin()) {}

  const LinearSystem& system() const { return *system_; }
  const Vector& xbar() const { return xbar_; }
  std::int64_t history_length() const { return history_len_; }

  /// Returns the state after observing one more symbol.
  PredictorState absorb(Symbol s) const {
    detail::require(s >= 0 && s < system_->C.rows(), "symbol outside alphabet");
    PredictorState next(*this);
    const Vector origin = system_->origin();
    next.xbar_ = system_->closedLoop * (xbar_ - origin) - system_->K * system_->meanY;
    next.xbar_ += system_->K.col(s);
    next.xbar_ += origin;
    // The affine row of (A-KC) is e_n^T and that of K is zero, so the
    // coordinate is 1 in exact arithmetic; pin it against round-off.
    if (system_->affine) next.xbar_(next.xbar_.size() - 1) = 1.0;
    ++next.history_len_;
    return next;
  }

  PredictorState absorb(std::span<const Symbol> symbols) const {
    PredictorState out(*this);
    for (Symbol s : symbols) out = out.absorb(s);
    return out;
  }

 private:
  std::shared_ptr<const LinearSystem> system_;
  Vector xbar_;
  std::int64_t history_len_ = 0;
};

struct Prediction {
  Vector probs;
  bool hasNegative = false;
};

/// m-step linear predictive distribution C A^{m-1} xbar + mean. Entries are
/// not clamped; hasNegative flags any entry below zero.
inline Prediction linear_predict(const PredictorState& state, int m) {
  detail::require(m >= 1, "prediction horizon must be >= 1");
  const LinearSystem& sys = state.system();
  Vector x = state.xbar() - sys.origin();
  for (int step = 1; step < m; ++step) x = sys.A * x;
  Prediction p;
  p.probs = sys.C * x + sys.meanY;
  p.hasNegative = (p.probs.array() < 0.0).any();
  return p;
}

/// Normalized forward recursion for P(x_t | y_1 .. y_t) under the
/// convention that y_{t+1} is emitted by x_t.
class ForwardFilter {
 public:
  explicit ForwardFilter(const HmmModel& model)
      : a_(model.A()), c_(model.C()), p_(stationary_info(model).pi) {}

  const Vector& posterior() const { return p_; }

  void absorb(Symbol s) {
    detail::require(s >= 0 && s < c_.rows(), "symbol outside alphabet");
    Vector w = p_.cwiseProduct(c_.row(s).transpose());
    const double norm = w.sum();
    if (!(norm > 0.0)) throw Error(ErrorCode::ZeroLikelihood, "observation has probability zero");
    p_.noalias() = a_ * (w / norm);
  }

 private:
  Matrix a_;
  Matrix c_;
  Vector p_;
};

inline Vector filter_posterior(const HmmModel& model, std::span<const Symbol> history) {
  ForwardFilter f(model);
  for (Symbol s : history) f.absorb(s);
  return f.posterior();
}

/// C A^{m-1} times a state posterior.
inline Vector predict_from_posterior(const HmmModel& model, const Vector& posterior, int m) {
  detail::require(m >= 1, "prediction horizon must be >= 1");
  Vector x = posterior;
  for (int step = 1; step < m; ++step) x = model.A() * x;
  return model.C() * x;
}

inline Vector optimal_predict(const HmmModel& model, std::span<const Symbol> history, int m) {
  return predict_from_posterior(model, filter_posterior(model, history), m);
}

/// beta_k times the centered past window. `window` is in time order with the
/// most recent symbol last; the output stacks ell-blocks for horizons 1..k.
inline Vector finite_horizon_predict(const Matrix& beta, const Vector& meanY,
                                     std::span<const Symbol> window) {
  const auto l = meanY.size();
  const auto k = static_cast<Eigen::Index>(window.size());
  detail::require(beta.cols() == k * l, "window length must equal the horizon k");
  Vector past(k * l);
  for (Eigen::Index j = 0; j < k; ++j) {
    past.segment(j * l, l) = -meanY;
    past(j * l + window[static_cast<std::size_t>(k - 1 - j)]) += 1.0;
  }
  return beta * past;
}

inline Vector finite_horizon_predict(const MomentSet& moments, std::span<const Symbol> window) {
  detail::require(static_cast<int>(window.size()) == moments.k, "window length must equal k");
  return finite_horizon_predict(beta_hat(moments), moments.meanY, window);
}

inline double l1_distance(const Vector& p, const Vector& q) {
  detail::require(p.size() == q.size(), "l1_distance needs equal lengths");
  return (p - q).lpNorm<1>();
}

}  // namespace subhmm
