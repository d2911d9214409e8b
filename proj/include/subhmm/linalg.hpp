#pragma once

#include "subhmm/core.hpp"

#include <cmath>

namespace subhmm {

/// Orthonormal basis of the orthogonal complement of span(1_n).
struct OrthoComplementBasis {
  int n = 0;
  Matrix U;  // n x (n-1)
};

/// Block-diagonal matrix with k copies of U_ell on the diagonal.
struct BlockBasis {
  int ell = 0;
  int k = 0;
  Matrix U;  // (k ell) x (k (ell-1))
};

/// Leading rank-r part of an SVD, M ~ U1 * diag(sigma) * V1^T.
struct TruncatedSvd {
  Matrix U1;
  Vector sigma;  // descending, length r
  Matrix V1;
  double sigmaNext = 0.0;  // (r+1)-st singular value, 0 if there is none
  Vector allSigma;         // full singular spectrum, for diagnostics

  Matrix lambda() const { return sigma.asDiagonal(); }
};

/// Householder QR of [1_n | e_1 .. e_{n-1}]; the trailing n-1 columns of Q
/// span the complement. Each column is signed so its first nonzero entry is
/// positive.
inline OrthoComplementBasis ortho_basis(int n) {
  detail::require(n >= 2, "ortho_basis needs n >= 2");
  Matrix seed = Matrix::Zero(n, n);
  seed.col(0).setOnes();
  seed.rightCols(n - 1) = Matrix::Identity(n, n - 1);
  const Eigen::HouseholderQR<Matrix> qr(seed);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);

  OrthoComplementBasis basis;
  basis.n = n;
  basis.U = q.rightCols(n - 1);
  for (Eigen::Index j = 0; j < basis.U.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(basis.U(i, j)) > 1e-12) {
        if (basis.U(i, j) < 0.0) basis.U.col(j) *= -1.0;
        break;
      }
    }
  }
  return basis;
}

inline BlockBasis block_basis(int ell, int k) {
  detail::require(k >= 1, "block_basis needs k >= 1");
  const Matrix u = ortho_basis(ell).U;
  BlockBasis bb;
  bb.ell = ell;
  bb.k = k;
  bb.U = Matrix::Zero(static_cast<Eigen::Index>(k) * ell, static_cast<Eigen::Index>(k) * (ell - 1));
  for (int b = 0; b < k; ++b) bb.U.block(b * ell, b * (ell - 1), ell, ell - 1) = u;
  return bb;
}

/// Projection onto the complement of span(1_n): I - 11^T / n.
inline Matrix complement_projection(int n) {
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
}

inline constexpr double kSingularCoreTol = 1e-12;

/// Moore-Penrose inverse of a symmetric PSD (k ell) x (k ell) matrix whose
/// kernel contains every block-constant vector. The compressed core
/// U^T G U is inverted by a Cholesky solve and expanded back, so no rank
/// decision is ever made on singular values.
///
/// Throws SingularCore when the core's smallest eigenvalue is below 1e-12.
inline Matrix structured_pinv(const Matrix& g, int ell, int k) {
  detail::require(g.rows() == g.cols(), "structured_pinv needs a square matrix");
  detail::require(g.rows() == static_cast<Eigen::Index>(ell) * k, "structured_pinv size mismatch");
  const Matrix u = block_basis(ell, k).U;
  Matrix core = u.transpose() * g * u;
  core = 0.5 * (core + core.transpose());

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(core, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues()(0) < kSingularCoreTol) {
    throw Error(ErrorCode::SingularCore,
                "smallest core eigenvalue " +
                    std::to_string(eig.info() == Eigen::Success ? eig.eigenvalues()(0) : NAN));
  }
  const Eigen::LLT<Matrix> llt(core);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCore, "core Cholesky failed");
  const Matrix core_inv = llt.solve(Matrix::Identity(core.rows(), core.cols()));
  Matrix out = u * core_inv * u.transpose();
  return 0.5 * (out + out.transpose());
}

/// Best rank-r approximation factors. Columns of U1 are signed so that
/// their largest-magnitude entry is positive; V1 is flipped to match.
inline TruncatedSvd truncated_svd(const Matrix& m, int r) {
  detail::require(r >= 0 && r <= std::min(m.rows(), m.cols()), "truncated_svd rank out of range");
  const Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.allSigma = svd.singularValues();
  out.U1 = svd.matrixU().leftCols(r);
  out.V1 = svd.matrixV().leftCols(r);
  out.sigma = out.allSigma.head(r);
  out.sigmaNext = r < out.allSigma.size() ? out.allSigma(r) : 0.0;
  for (int j = 0; j < r; ++j) {
    Eigen::Index imax = 0;
    out.U1.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.U1(imax, j) < 0.0) {
      out.U1.col(j) *= -1.0;
      out.V1.col(j) *= -1.0;
    }
  }
  return out;
}

}  // namespace subhmm
