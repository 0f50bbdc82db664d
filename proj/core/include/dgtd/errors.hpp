#pragma once

#include <stdexcept>
#include <string>

namespace dgtd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Chain is not ergodic (reducible, or stationary mass vanishes somewhere).
struct ErgodicityError : Error {
  using Error::Error;
};

/// Feature matrix lost full column rank.
struct RankError : Error {
  using Error::Error;
};

/// Communication graph is not connected, or an edge is malformed.
struct GraphError : Error {
  using Error::Error;
};

/// Invalid run configuration or preset parameters.
struct ConfigError : Error {
  using Error::Error;
};

/// Iterates or an ODE trajectory left the configured norm bound.
struct DivergenceError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Central tolerance table. Every dense solve is followed by a residual
/// check against one of these.
namespace tol {
inline constexpr double row_stochastic = 1e-12;
inline constexpr double stationary_fixed_point = 1e-10;
inline constexpr double rank_ratio = 1e-10;
inline constexpr double projection = 1e-10;
inline constexpr double bellman_residual = 1e-10;
inline constexpr double stationary_residual = 1e-8;
inline constexpr double kkt = 1e-8;
}  // namespace tol

}  // namespace dgtd
