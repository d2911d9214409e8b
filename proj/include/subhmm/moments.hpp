#pragma once

#include "subhmm/core.hpp"
#include "subhmm/hmm.hpp"
#include "subhmm/linalg.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace subhmm {

/// Second-moment pair used to form the linear prediction matrix:
///   H = E[ybar^+(k) ybar^-(k)^T]  (future on past),
///   G = E[ybar^-(k) ybar^-(k)^T]  (Gram of the past),
/// or their sample counterparts.
struct MomentSet {
  enum class Kind { Theoretical, Empirical };

  Kind kind = Kind::Theoretical;
  int k = 0;
  int ell = 0;
  Matrix H;
  Matrix G;
  Vector meanY;
};

/// Block Hankel data matrices in index form. Every ell-block of a column of
/// Y^+ or Y^- is an indicator vector, so only the symbol index is stored.
///
/// Zero-based column c (c = 0..T-1) corresponds to the time u = c+1:
///   block i of Y^+ holds y_{u+i}, block j of Y^- holds y_{u-1-j},
/// with y_s outside 1..T replaced by symbol 0 (the padding symbol).
struct HankelPair {
  int ell = 0;
  int k = 0;
  std::int64_t T = 0;
  std::vector<Symbol> observations;  // y_1 .. y_T
  Vector mPlus;   // row means of Y^+, length k ell
  Vector mMinus;  // row means of Y^-, length k ell

  static constexpr Symbol kPadSymbol = 0;

  Symbol plus(int block, std::int64_t col) const {
    const std::int64_t s = col + block;
    return s < T ? observations[static_cast<std::size_t>(s)] : kPadSymbol;
  }
  Symbol minus(int block, std::int64_t col) const {
    const std::int64_t s = col - block - 1;
    return s >= 0 ? observations[static_cast<std::size_t>(s)] : kPadSymbol;
  }

  Matrix dense_plus() const { return dense(true); }
  Matrix dense_minus() const { return dense(false); }

 private:
  Matrix dense(bool future) const {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(k) * ell, T);
    for (std::int64_t c = 0; c < T; ++c)
      for (int b = 0; b < k; ++b) out(b * ell + (future ? plus(b, c) : minus(b, c)), c) = 1.0;
    return out;
  }
};

/// E[ybar_t ybar_{t+lag}^T].
inline Matrix cross_cov(const HmmModel& model, const StationaryInfo& info, int lag) {
  const Matrix& C = model.C();
  if (lag >= 0) {
    Matrix out = C * info.S * detail::matrix_power(info.abar, lag).transpose() * C.transpose();
    if (lag == 0) out += info.R;
    return out;
  }
  return C * detail::matrix_power(info.abar, -lag) * info.S * C.transpose();
}

inline Matrix cross_cov(const HmmModel& model, int lag) {
  return cross_cov(model, stationary_info(model), lag);
}

/// Same moment through powers of A instead of Abar. Used to cross-check the
/// two algebraic routes.
inline Matrix cross_cov_via_a(const HmmModel& model, const StationaryInfo& info, int lag) {
  const Matrix& C = model.C();
  const Matrix before = detail::matrix_power(model.A(), lag < 0 ? -lag : 0);
  const Matrix after = detail::matrix_power(model.A(), lag > 0 ? lag : 0);
  Matrix out = C * before * info.S * after.transpose() * C.transpose();
  if (lag == 0) out += info.R;
  return out;
}

/// Exact H_k and Gamma_k. Block (i, j) (one-based) of H_k is the lag -(i+j-1)
/// moment and block (i, j) of Gamma_k is the lag (i - j) moment.
inline MomentSet theoretical_moments(const HmmModel& model, int k) {
  detail::require(k >= 1, "horizon k must be >= 1");
  const auto info = stationary_info(model);
  const int l = model.ell();

  std::vector<Matrix> lags(2 * k);  // lags[d] = cross_cov(-d), d = 0 .. 2k-1
  for (int d = 0; d < 2 * k; ++d) lags[d] = cross_cov(model, info, -d);

  MomentSet m;
  m.kind = MomentSet::Kind::Theoretical;
  m.k = k;
  m.ell = l;
  m.meanY = info.meanY;
  m.H.resize(k * l, k * l);
  m.G.resize(k * l, k * l);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      m.H.block(i * l, j * l, l, l) = lags[i + j + 1];
      // cross_cov(i - j) = cross_cov(j - i)^T
      m.G.block(i * l, j * l, l, l) = i >= j ? Matrix(lags[i - j].transpose()) : lags[j - i];
    }
  }
  m.G = 0.5 * (m.G + m.G.transpose());
  return m;
}

inline Vector sample_mean(std::span<const Symbol> observations, int ell) {
  Vector mean = Vector::Zero(ell);
  for (Symbol s : observations) mean(s) += 1.0;
  if (!observations.empty()) mean /= static_cast<double>(observations.size());
  return mean;
}

inline HankelPair hankel(std::span<const Symbol> observations, int ell, int k) {
  detail::require(!observations.empty(), "hankel needs at least one observation");
  detail::require(k >= 1, "horizon k must be >= 1");
  detail::require(ell >= 1, "alphabet size must be >= 1");
  for (Symbol s : observations) detail::require(s >= 0 && s < ell, "symbol outside alphabet");

  HankelPair h;
  h.ell = ell;
  h.k = k;
  h.T = static_cast<std::int64_t>(observations.size());
  h.observations.assign(observations.begin(), observations.end());
  h.mPlus = Vector::Zero(k * ell);
  h.mMinus = Vector::Zero(k * ell);
  for (std::int64_t c = 0; c < h.T; ++c) {
    for (int b = 0; b < k; ++b) {
      h.mPlus(b * ell + h.plus(b, c)) += 1.0;
      h.mMinus(b * ell + h.minus(b, c)) += 1.0;
    }
  }
  h.mPlus /= static_cast<double>(h.T);
  h.mMinus /= static_cast<double>(h.T);
  return h;
}

/// H_hat = T^-1 Ybar^+ Ybar^-T and Gamma_hat = T^-1 Ybar^- Ybar^-T, with
/// row-wise Hankel centering. Accumulates indicator co-occurrence counts
/// instead of forming the dense products.
inline MomentSet empirical_moments(const HankelPair& h) {
  const int l = h.ell;
  const int k = h.k;
  const Eigen::Index dim = static_cast<Eigen::Index>(k) * l;
  Matrix cross = Matrix::Zero(dim, dim);
  Matrix gram = Matrix::Zero(dim, dim);
  std::vector<Eigen::Index> plus_idx(k), minus_idx(k);
  for (std::int64_t c = 0; c < h.T; ++c) {
    for (int b = 0; b < k; ++b) {
      plus_idx[b] = b * l + h.plus(b, c);
      minus_idx[b] = b * l + h.minus(b, c);
    }
    for (int j = 0; j < k; ++j) {
      const Eigen::Index col = minus_idx[j];
      for (int i = 0; i < k; ++i) {
        cross(plus_idx[i], col) += 1.0;
        if (i <= j) gram(minus_idx[i], col) += 1.0;
      }
    }
  }
  gram = Matrix(gram.selfadjointView<Eigen::Upper>());
  const double inv_t = 1.0 / static_cast<double>(h.T);

  MomentSet m;
  m.kind = MomentSet::Kind::Empirical;
  m.k = k;
  m.ell = l;
  m.meanY = sample_mean(h.observations, l);
  m.H = cross * inv_t - h.mPlus * h.mMinus.transpose();
  m.G = gram * inv_t - h.mMinus * h.mMinus.transpose();
  m.G = 0.5 * (m.G + m.G.transpose());
  return m;
}

/// beta_k = H_k Gamma_k^+, with the structured pseudo-inverse.
inline Matrix beta_hat(const MomentSet& m) { return m.H * structured_pinv(m.G, m.ell, m.k); }

}  // namespace subhmm
