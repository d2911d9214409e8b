#pragma once

#include "subhmm/core.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace subhmm {

/// Finite hidden Markov model in the column-stochastic convention:
///   A(i, j) = P(x_{t+1} = i | x_t = j),   C(i, j) = P(y_{t+1} = i | x_t = j).
/// Note the observation y_{t+1} is emitted by the state at time t.
///
/// Instances are only produced by validate_model() and are immutable.
class HmmModel {
 public:
  int n() const { return static_cast<int>(a_.rows()); }
  int ell() const { return static_cast<int>(c_.rows()); }
  const Matrix& A() const { return a_; }
  const Matrix& C() const { return c_; }

 private:
  HmmModel(Matrix a, Matrix c) : a_(std::move(a)), c_(std::move(c)) {}
  friend HmmModel validate_model(const Matrix& a, const Matrix& c);

  Matrix a_;
  Matrix c_;
};

struct StationaryInfo {
  Vector pi;        // stationary distribution, A pi = pi
  Matrix abar;      // A - pi 1^T
  Matrix S;         // diag(pi) - pi pi^T
  Matrix R;         // diag(C pi) - C diag(pi) C^T
  Vector meanY;     // C pi
};

struct Trajectory {
  std::vector<Symbol> states;        // x_0 .. x_T
  std::vector<Symbol> observations;  // y_1 .. y_T
  std::uint64_t seed = 0;
};

namespace detail {

constexpr double kStochasticTol = 1e-9;

inline void check_column_stochastic(const Matrix& m, const char* name) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kStochasticTol) {
        throw Error(ErrorCode::NotStochastic,
                    std::string(name) + " has entry outside [0,1] at (" + std::to_string(i) +
                        "," + std::to_string(j) + ")");
      }
    }
    const double sum = m.col(j).sum();
    if (std::abs(sum - 1.0) > kStochasticTol) {
      throw Error(ErrorCode::NotStochastic, std::string(name) + " column " + std::to_string(j) +
                                                " sums to " + std::to_string(sum));
    }
  }
}

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline BoolMatrix bool_product(const BoolMatrix& a, const BoolMatrix& b) {
  const Eigen::Index n = a.rows();
  BoolMatrix out = BoolMatrix::Constant(n, b.cols(), false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index l = 0; l < a.cols(); ++l)
      if (a(i, l))
        for (Eigen::Index j = 0; j < b.cols(); ++j) out(i, j) = out(i, j) || b(l, j);
  return out;
}

/// Irreducibility: (I + A)^{n-1} entrywise positive.
inline bool is_irreducible(const Matrix& a) {
  const Eigen::Index n = a.rows();
  BoolMatrix step = (a.array() > 0.0).matrix();
  step.diagonal().setConstant(true);
  BoolMatrix reach = BoolMatrix::Identity(n, n);
  for (Eigen::Index s = 0; s + 1 < n; ++s) reach = bool_product(reach, step);
  return reach.all();
}

/// Primitivity (irreducible and aperiodic): A^m entrywise positive for
/// m = (n-1)^2 + 1, Wielandt's bound, which is at most n^2.
inline bool is_primitive(const Matrix& a) {
  const Eigen::Index n = a.rows();
  const BoolMatrix step = (a.array() > 0.0).matrix();
  BoolMatrix power = step;
  const Eigen::Index m = (n - 1) * (n - 1) + 1;
  for (Eigen::Index s = 1; s < m; ++s) {
    if (power.all()) return true;
    power = bool_product(power, step);
  }
  return power.all();
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform, unlike std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Symbol draw_from_cdf(const Vector& cdf, double u) {
  for (Eigen::Index i = 0; i + 1 < cdf.size(); ++i)
    if (u < cdf(i)) return static_cast<Symbol>(i);
  return static_cast<Symbol>(cdf.size() - 1);
}

}  // namespace detail

/// Validates and normalizes an HMM. Throws NotStochastic or NotErgodic.
inline HmmModel validate_model(const Matrix& a, const Matrix& c) {
  detail::require(a.rows() == a.cols(), "A must be square");
  detail::require(a.rows() >= 2, "need at least two states");
  detail::require(c.cols() == a.cols(), "C must have one column per state");
  detail::require(c.rows() >= 2, "need at least two symbols");
  detail::check_column_stochastic(a, "A");
  detail::check_column_stochastic(c, "C");
  if (!detail::is_irreducible(a)) throw Error(ErrorCode::NotErgodic, "A is reducible");
  if (!detail::is_primitive(a)) throw Error(ErrorCode::NotErgodic, "A is periodic");

  Matrix an = a;
  Matrix cn = c;
  for (Eigen::Index j = 0; j < an.cols(); ++j) an.col(j) /= an.col(j).sum();
  for (Eigen::Index j = 0; j < cn.cols(); ++j) cn.col(j) /= cn.col(j).sum();
  return HmmModel(std::move(an), std::move(cn));
}

/// Stationary distribution from the bordered system [(A - I); 1^T] pi = [0; 1].
inline StationaryInfo stationary_info(const HmmModel& model) {
  const int n = model.n();
  Matrix bordered(n + 1, n);
  bordered.topRows(n) = model.A() - Matrix::Identity(n, n);
  bordered.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;

  const Eigen::ColPivHouseholderQR<Matrix> qr(bordered);
  if (qr.rank() != n)
    throw Error(ErrorCode::NumericalFailure, "eigenvalue 1 of A is not simple");
  StationaryInfo info;
  info.pi = qr.solve(rhs);
  if ((bordered * info.pi - rhs).lpNorm<Eigen::Infinity>() > 1e-10 || (info.pi.array() <= 0.0).any())
    throw Error(ErrorCode::NumericalFailure, "stationary solve did not produce a positive distribution");
  info.pi /= info.pi.sum();

  const Matrix& A = model.A();
  const Matrix& C = model.C();
  info.abar = A - info.pi * RowVector::Ones(n);
  info.S = Matrix(info.pi.asDiagonal()) - info.pi * info.pi.transpose();
  info.meanY = C * info.pi;
  info.R = Matrix(info.meanY.asDiagonal()) - C * info.pi.asDiagonal() * C.transpose();
  info.S = 0.5 * (info.S + info.S.transpose());
  info.R = 0.5 * (info.R + info.R.transpose());
  return info;
}

/// Simulates x_0 .. x_T and y_1 .. y_T. x_0 is drawn from the stationary
/// distribution; y_{t+1} and x_{t+1} are both drawn given x_t.
inline Trajectory simulate(const HmmModel& model, std::int64_t length, std::uint64_t seed) {
  detail::require(length >= 1, "trajectory length must be >= 1");
  const auto info = stationary_info(model);
  const int n = model.n();

  Vector pi_cdf(n);
  std::vector<Vector> a_cdf(n), c_cdf(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) pi_cdf(i) = (acc += info.pi(i));
  for (int j = 0; j < n; ++j) {
    a_cdf[j].resize(n);
    c_cdf[j].resize(model.ell());
    acc = 0.0;
    for (int i = 0; i < n; ++i) a_cdf[j](i) = (acc += model.A()(i, j));
    acc = 0.0;
    for (int i = 0; i < model.ell(); ++i) c_cdf[j](i) = (acc += model.C()(i, j));
  }

  Trajectory traj;
  traj.seed = seed;
  traj.states.resize(static_cast<std::size_t>(length) + 1);
  traj.observations.resize(static_cast<std::size_t>(length));
  std::mt19937_64 rng(seed);
  Symbol x = detail::draw_from_cdf(pi_cdf, detail::unit_uniform(rng));
  traj.states[0] = x;
  for (std::int64_t t = 0; t < length; ++t) {
    traj.observations[t] = detail::draw_from_cdf(c_cdf[x], detail::unit_uniform(rng));
    x = detail::draw_from_cdf(a_cdf[x], detail::unit_uniform(rng));
    traj.states[t + 1] = x;
  }
  return traj;
}

}  // namespace subhmm
