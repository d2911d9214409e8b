#include "test_util.hpp"

#include <cmath>

using namespace subhmm;
using testutil::mat;
using testutil::max_abs;

namespace {

ErrorCode code_of(const Matrix& a, const Matrix& c) {
  try {
    validate_model(a, c);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::Io;
}

}  // namespace

TEST(ValidateModel, AcceptsReferenceSystem) {
  const auto m = validate_model(mat({{.9, .1}, {.1, .9}}), mat({{.9, .1}, {.1, .9}}));
  EXPECT_EQ(m.n(), 2);
  EXPECT_EQ(m.ell(), 2);
}

TEST(ValidateModel, RejectsReducibleChain) {
  EXPECT_EQ(code_of(mat({{1, 0}, {0, 1}}), mat({{.9, .1}, {.1, .9}})), ErrorCode::NotErgodic);
}

TEST(ValidateModel, RejectsPeriodicChain) {
  EXPECT_EQ(code_of(mat({{0, 1}, {1, 0}}), mat({{.9, .1}, {.1, .9}})), ErrorCode::NotErgodic);
}

TEST(ValidateModel, RejectsNonStochastic) {
  EXPECT_EQ(code_of(mat({{0.6, 0.5}, {0.5, 0.5}}), mat({{.9, .1}, {.1, .9}})), ErrorCode::NotStochastic);
  EXPECT_EQ(code_of(mat({{.9, .1}, {.1, .9}}), mat({{1.2, .1}, {-.2, .9}})), ErrorCode::NotStochastic);
}

TEST(ValidateModel, RejectsShapeErrors) {
  EXPECT_EQ(code_of(mat({{.9, .1, .2}, {.1, .9, .8}}), mat({{.5, .5}, {.5, .5}})), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of(mat({{.9, .1}, {.1, .9}}), mat({{.5, .5, .5}, {.5, .5, .5}})), ErrorCode::InvalidArgument);
}

TEST(ValidateModel, RenormalizesWithinTolerance) {
  const auto m = validate_model(mat({{.9 + 1e-11, .1}, {.1, .9}}), mat({{.9, .1}, {.1, .9}}));
  EXPECT_LE(std::abs(m.A().col(0).sum() - 1.0), 1e-15);
}

TEST(Stationary, A1C1) {
  const auto info = stationary_info(fixtures::a1c1());
  EXPECT_LE(max_abs(info.pi - testutil::vec({.5, .5})), 1e-14);
  EXPECT_LE(max_abs(info.S - mat({{.25, -.25}, {-.25, .25}})), 1e-14);
  EXPECT_LE(max_abs(info.R - mat({{.09, -.09}, {-.09, .09}})), 1e-14);
  EXPECT_LE(max_abs(info.meanY - testutil::vec({.5, .5})), 1e-14);
}

TEST(Stationary, A3C3) {
  const auto info = stationary_info(fixtures::a3c3());
  EXPECT_LE(max_abs(info.pi - testutil::vec({4.0 / 9, 1.0 / 9, 4.0 / 9})), 1e-14);
}

TEST(Stationary, InvariantsForAllFixtures) {
  for (auto name : fixtures::kNames) {
    const auto model = fixtures::by_name(name);
    const auto info = stationary_info(model);
    EXPECT_LE((model.A() * info.pi - info.pi).lpNorm<Eigen::Infinity>(), 1e-10) << name;
    EXPECT_LE(max_abs(RowVector::Ones(model.n()) * info.S), 1e-12) << name;
    EXPECT_LE(max_abs(RowVector::Ones(model.ell()) * info.R), 1e-12) << name;
    EXPECT_LT(detail::spectral_radius(info.abar), 1.0) << name;
    EXPECT_LE(max_abs(info.meanY - model.C() * info.pi), 1e-15) << name;
  }
}

TEST(Stationary, PowersApproachRankOneLimit) {
  const auto model = fixtures::a1c1();
  const auto info = stationary_info(model);
  const Matrix diff = detail::matrix_power(model.A(), 50) - info.pi * RowVector::Ones(2);
  EXPECT_LE(diff.lpNorm<Eigen::Infinity>(), 2.0 * std::pow(0.8, 50));
}

TEST(Simulate, DeterministicGivenSeed) {
  const auto model = fixtures::a3c3();
  const auto a = simulate(model, 500, 42);
  const auto b = simulate(model, 500, 42);
  const auto c = simulate(model, 500, 43);
  EXPECT_EQ(a.observations, b.observations);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.seed, 42u);
  EXPECT_NE(a.observations, c.observations);
  EXPECT_EQ(a.states.size(), 501u);
  EXPECT_EQ(a.observations.size(), 500u);
}

TEST(Simulate, DeterministicEmission) {
  const auto model = validate_model(mat({{.9, .1}, {.1, .9}}), mat({{1, 1}, {0, 0}}));
  for (Symbol s : simulate(model, 1000, 7).observations) EXPECT_EQ(s, 0);
}

TEST(Simulate, SymbolFrequenciesMatchMean) {
  const auto model = fixtures::a1c1();
  const auto traj = simulate(model, 100000, 2024);
  const Vector freq = sample_mean(traj.observations, 2);
  EXPECT_LE((freq - stationary_info(model).meanY).lpNorm<Eigen::Infinity>(), 0.01);
}

TEST(Simulate, StateOccupancyMatchesStationary) {
  const auto model = fixtures::a3c3();
  const auto traj = simulate(model, 100000, 99);
  Vector occ = Vector::Zero(3);
  for (std::size_t t = 1; t < traj.states.size(); ++t) occ(traj.states[t]) += 1.0;
  occ /= static_cast<double>(traj.states.size() - 1);
  // Chain mixes at rate 0.85; sd of occupancy is ~0.006 at this length.
  EXPECT_LE((occ - stationary_info(model).pi).lpNorm<Eigen::Infinity>(), 0.02);
}

TEST(Simulate, EmissionFollowsCurrentState) {
  // Deterministic emission reveals x_t through y_{t+1}.
  const auto model = validate_model(fixtures::a1c1().A(), Matrix::Identity(2, 2));
  const auto traj = simulate(model, 200, 3);
  for (std::size_t t = 0; t < traj.observations.size(); ++t) EXPECT_EQ(traj.observations[t], traj.states[t]);
}

TEST(Simulate, RejectsZeroLength) { EXPECT_THROW(simulate(fixtures::a1c1(), 0, 1), Error); }
