#pragma once

#include "subhmm/core.hpp"
#include "subhmm/hmm.hpp"

#include <array>
#include <string>
#include <string_view>

namespace subhmm::fixtures {

// Three reference systems: an inert chain with informative output (a1c1),
// the same chain with weakly informative output (a2c2), and a three-state
// chain with a short-lived middle state (a3c3).

inline HmmModel a1c1() {
  Matrix a(2, 2), c(2, 2);
  a << 0.9, 0.1, 0.1, 0.9;
  c << 0.9, 0.1, 0.1, 0.9;
  return validate_model(a, c);
}

inline HmmModel a2c2() {
  Matrix a(2, 2), c(2, 2);
  a << 0.9, 0.1, 0.1, 0.9;
  c << 0.6, 0.4, 0.4, 0.6;
  return validate_model(a, c);
}

inline HmmModel a3c3() {
  Matrix a(3, 3), c(3, 3);
  a << 0.9, 0.2, 0.05,
       0.05, 0.6, 0.05,
       0.05, 0.2, 0.9;
  c << 0.8, 0.1, 0.1,
       0.1, 0.8, 0.1,
       0.1, 0.1, 0.8;
  return validate_model(a, c);
}

inline constexpr std::array<std::string_view, 3> kNames = {"a1c1", "a2c2", "a3c3"};

inline bool exists(std::string_view name) {
  for (auto n : kNames)
    if (n == name) return true;
  return false;
}

inline HmmModel by_name(std::string_view name) {
  if (name == "a1c1") return a1c1();
  if (name == "a2c2") return a2c2();
  if (name == "a3c3") return a3c3();
  throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + std::string(name) + "'");
}

}  // namespace subhmm::fixtures
