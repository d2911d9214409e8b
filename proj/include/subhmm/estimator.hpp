#pragma once

#include "subhmm/core.hpp"
#include "subhmm/hmm.hpp"
#include "subhmm/linalg.hpp"
#include "subhmm/moments.hpp"
#include "subhmm/predictor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace subhmm {

/// Rank n-1 factorization beta_hat ~ Ohat * Khat with Ohat = U1 and
/// Khat = Lambda11 V1^T.
struct Factorization {
  Matrix Ohat;   // (k ell) x (n-1), orthonormal columns
  Matrix Khat;   // (n-1) x (k ell)
  double sigmaDropped = 0.0;
  Vector singularValues;
  bool tieAtCut = false;  // sigma_{n-1} and sigma_n nearly equal
};

struct FitDiagnostics {
  double sigmaDropped = 0.0;
  Vector singularValues;
  bool tieAtCut = false;
  double condStateGram = 0.0;     // condition number of Xhat Xhat^T
  double condResidualCore = 0.0;  // condition number of the compressed Ehat Ehat^T
};

/// Estimated innovation-form system in the basis chosen by the SVD, with
/// the affine coordinate last.
struct EstimatedSystem {
  int n = 0;
  int ell = 0;
  int k = 0;
  Matrix Ahat;       // n x n
  Matrix Chat;       // ell x n
  Matrix Khat;       // n x ell
  Matrix Xhat;       // n x T, last row ones
  Matrix residuals;  // ell x T
  Vector meanY;      // sample mean of the training observations
  FitDiagnostics diagnostics;

  LinearSystem linear_system() const { return LinearSystem(Ahat, Chat, Khat, meanY, true); }
};

inline Factorization factorize(const Matrix& beta, int n, int ell) {
  detail::require(n >= 1, "model order must be >= 1");
  detail::require(ell >= 2 && beta.rows() % ell == 0, "beta size must be a multiple of ell");
  const auto k = static_cast<int>(beta.rows() / ell);
  if (n - 1 > k * (ell - 1))
    throw Error(ErrorCode::OrderTooLarge, "n-1 = " + std::to_string(n - 1) +
                                              " exceeds the rank budget k(ell-1) = " +
                                              std::to_string(k * (ell - 1)));
  const auto svd = truncated_svd(beta, n - 1);
  Factorization f;
  f.Ohat = svd.U1;
  f.Khat = svd.lambda() * svd.V1.transpose();
  f.sigmaDropped = svd.sigmaNext;
  f.singularValues = svd.allSigma;
  if (n >= 2) {
    const double top = svd.allSigma(0);
    f.tieAtCut = top > 0.0 && (svd.sigma(n - 2) - svd.sigmaNext) <= 1e-8 * top;
  }
  return f;
}

/// Xhat = Khat (Y^- - (1_k (x) m_Y) 1^T) with a row of ones adjoined.
/// Column c estimates the state at time c (c = 0 .. T-1).
inline Matrix estimate_states(const Factorization& f, const HankelPair& h, const Vector& meanY) {
  const int l = h.ell;
  const int k = h.k;
  const auto r = f.Khat.rows();
  detail::require(f.Khat.cols() == static_cast<Eigen::Index>(k) * l, "Khat does not match the Hankel horizon");
  detail::require(meanY.size() == l, "meanY has wrong length");

  Vector offset = Vector::Zero(r);
  for (int b = 0; b < k; ++b) offset += f.Khat.middleCols(b * l, l) * meanY;

  Matrix x(r + 1, h.T);
  for (std::int64_t c = 0; c < h.T; ++c) {
    auto col = x.col(c).head(r);
    col = -offset;
    for (int b = 0; b < k; ++b) col += f.Khat.col(b * l + h.minus(b, c));
    x(r, c) = 1.0;
  }
  return x;
}

/// Least-squares regressions Xhat_1 = A Xhat + K E, Y = C Xhat + E, where
/// Xhat_1 drops the first column of Xhat and repeats its last one.
inline EstimatedSystem regress_system(const Matrix& xhat, std::span<const Symbol> observations, int ell) {
  const auto n = xhat.rows();
  const auto T = xhat.cols();
  detail::require(static_cast<Eigen::Index>(observations.size()) == T, "one observation per state estimate");
  detail::require(T >= n, "need at least n observations");
  const double inv_t = 1.0 / static_cast<double>(T);

  Matrix x_next(n, T);
  x_next.leftCols(T - 1) = xhat.rightCols(T - 1);
  x_next.col(T - 1) = xhat.col(T - 1);

  Matrix y_x = Matrix::Zero(ell, n);  // Y X^T
  for (Eigen::Index t = 0; t < T; ++t) y_x.row(observations[t]) += xhat.col(t).transpose();
  const Matrix gram = xhat * xhat.transpose() * inv_t;

  const Eigen::SelfAdjointEigenSolver<Matrix> gram_eig(gram, Eigen::EigenvaluesOnly);
  const double g_min = gram_eig.eigenvalues()(0);
  const double g_max = gram_eig.eigenvalues()(n - 1);
  if (!(g_min > 1e-12 * g_max))
    throw Error(ErrorCode::DegenerateStates, "state Gram matrix is singular; order too large for the data");
  const Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::DegenerateStates, "state Gram Cholesky failed");

  EstimatedSystem est;
  est.n = static_cast<int>(n);
  est.ell = ell;
  // B (X X^T)^{-1} = ((X X^T)^{-1} B^T)^T since the Gram is symmetric.
  est.Ahat = llt.solve((x_next * xhat.transpose() * inv_t).transpose()).transpose();
  est.Chat = llt.solve((y_x * inv_t).transpose()).transpose();

  est.residuals = -est.Chat * xhat;
  for (Eigen::Index t = 0; t < T; ++t) est.residuals(observations[t], t) += 1.0;
  Matrix ee = est.residuals * est.residuals.transpose() * inv_t;
  ee = 0.5 * (ee + ee.transpose());
  est.Khat = x_next * est.residuals.transpose() * inv_t * structured_pinv(ee, ell, 1);

  est.Xhat = xhat;
  est.meanY = sample_mean(observations, ell);
  est.diagnostics.condStateGram = g_max / g_min;
  const Matrix u = ortho_basis(ell).U;
  const Eigen::SelfAdjointEigenSolver<Matrix> ee_eig(u.transpose() * ee * u, Eigen::EigenvaluesOnly);
  est.diagnostics.condResidualCore =
      ee_eig.eigenvalues()(ee_eig.eigenvalues().size() - 1) / ee_eig.eigenvalues()(0);
  return est;
}

/// The full pipeline: Hankel matrices, sample moments, beta_hat, rank n-1
/// SVD factorization, state reconstruction and regression.
inline EstimatedSystem subspace_fit(std::span<const Symbol> observations, int ell, int n, int k) {
  detail::require(n >= 1, "model order must be >= 1");
  detail::require(ell >= 2, "alphabet size must be >= 2");
  if (n - 1 > k * (ell - 1))
    throw Error(ErrorCode::OrderTooLarge, "n-1 exceeds the rank budget k(ell-1)");

  const HankelPair h = hankel(observations, ell, k);
  const Vector mean = sample_mean(observations, ell);
  Factorization f;
  if (n == 1) {
    // Rank-0 factorization: no state dynamics, prediction is the mean.
    f.Ohat = Matrix::Zero(static_cast<Eigen::Index>(k) * ell, 0);
    f.Khat = Matrix::Zero(0, static_cast<Eigen::Index>(k) * ell);
  } else {
    f = factorize(beta_hat(empirical_moments(h)), n, ell);
  }
  EstimatedSystem est = regress_system(estimate_states(f, h, mean), observations, ell);
  est.k = k;
  est.diagnostics.sigmaDropped = f.sigmaDropped;
  est.diagnostics.singularValues = f.singularValues;
  est.diagnostics.tieAtCut = f.tieAtCut;
  return est;
}

struct TrueFactors {
  Matrix O;  // (k ell) x n, block i = C Abar^{i}
  Matrix K;  // n x (k ell), block j = (A - KC)^{j} K
};

inline TrueFactors true_factors(const HmmModel& model, const Matrix& gain, int k) {
  detail::require(k >= 1, "horizon k must be >= 1");
  const auto info = stationary_info(model);
  const int n = model.n();
  const int l = model.ell();
  TrueFactors tf;
  tf.O.resize(k * l, n);
  tf.K.resize(n, k * l);
  const Matrix closed = model.A() - gain * model.C();
  Matrix obs = model.C();
  Matrix ctl = gain;
  for (int i = 0; i < k; ++i) {
    tf.O.middleRows(i * l, l) = obs;
    tf.K.middleCols(i * l, l) = ctl;
    obs = obs * info.abar;
    ctl = closed * ctl;
  }
  return tf;
}

}  // namespace subhmm
