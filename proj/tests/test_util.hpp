#pragma once

#include "subhmm/subhmm.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace testutil {

inline double max_abs(const subhmm::Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline subhmm::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  subhmm::Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline subhmm::Vector vec(std::initializer_list<double> v) {
  subhmm::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline std::vector<subhmm::Symbol> random_symbols(std::mt19937_64& rng, int ell, std::size_t len) {
  std::uniform_int_distribution<int> d(0, ell - 1);
  std::vector<subhmm::Symbol> out(len);
  for (auto& s : out) s = d(rng);
  return out;
}

/// Full-SVD Moore-Penrose inverse with a relative cutoff.
inline subhmm::Matrix svd_pinv(const subhmm::Matrix& m) {
  const Eigen::JacobiSVD<subhmm::Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = 1e-10 * (s.size() ? s(0) : 0.0);
  subhmm::Vector inv = s;
  for (Eigen::Index i = 0; i < s.size(); ++i) inv(i) = s(i) > cut ? 1.0 / s(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline int numeric_rank(const subhmm::Matrix& m, double tol) {
  const Eigen::JacobiSVD<subhmm::Matrix> svd(m);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) r += svd.singularValues()(i) > tol;
  return r;
}

inline subhmm::HmmModel uninformative() {
  return subhmm::validate_model(mat({{0.9, 0.1}, {0.1, 0.9}}), mat({{0.5, 0.5}, {0.5, 0.5}}));
}

}  // namespace testutil
