#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pclqr/model.hpp"
#include "pclqr/types.hpp"

namespace pclqr {

struct Trajectory {
  std::vector<Vector> states;  ///< length steps+1
  std::vector<Vector> inputs;  ///< u^t = K x^t, same length (zero when open loop)
};

/// Trajectories across a parameter grid, with outputs when an output map is
/// supplied. A diverging parameter point is recorded and truncated; the sweep
/// continues.
struct TrajectoryBundle {
  std::vector<double> deltas;
  std::vector<int> times;
  std::vector<Trajectory> runs;
  std::vector<std::vector<Vector>> outputs;  ///< empty when no output map
  std::vector<std::optional<int>> diverged_at;
};

struct ControllabilityPoint {
  double delta = 0.0;
  double det_inv = 0.0;  ///< 1 / det(W_c), via log-determinant
  bool defined = false;  ///< false at parameter points with unstable open loop
};

struct SurrogateErrors {
  double rel_error_mean = 0.0;
  double rel_error_var = 0.0;
};

/// Exact iteration of the realized closed loop at one parameter value.
/// Throws DivergenceError (with the step index) past the representable range.
Trajectory simulate(const UncertainLTI& sys, const std::optional<Matrix>& K, double delta,
                    const Vector& x0, int steps);

/// simulate() per grid point; outputs y = C x when C is given.
TrajectoryBundle sweep(const UncertainLTI& sys, const std::optional<Matrix>& K,
                       std::span<const double> grid, const Vector& x0, int steps,
                       const std::optional<Matrix>& C);

/// Control-energy diagnostic 1/det(W_c) with W_c the infinite-horizon
/// controllability Gramian A W A' + B B' = W, per grid point.
std::vector<ControllabilityPoint> controllability_energy(const UncertainLTI& sys,
                                                         std::span<const double> grid);

/// Time-aggregated relative L2 errors of the surrogate mean and variance
/// trajectories against a Monte Carlo reference with `samples` draws.
SurrogateErrors surrogate_vs_mc(const UncertainLTI& sys, const std::optional<Matrix>& K,
                                int order, const Vector& x0, int steps, int samples,
                                std::uint64_t seed);

}  // namespace pclqr
