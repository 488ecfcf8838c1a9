#include "pclqr/sim.hpp"

#include <cmath>

#include "pclqr/errors.hpp"
#include "pclqr/galerkin.hpp"
#include "pclqr/numerics.hpp"

namespace pclqr {

namespace {

constexpr double kDivergenceNorm = 1e12;

}  // namespace

Trajectory simulate(const UncertainLTI& sys, const std::optional<Matrix>& K, double delta,
                    const Vector& x0, int steps) {
  if (steps < 0) throw InputError("steps: must be non-negative");
  if (x0.size() != sys.n) throw InputError("x0: expected n entries");
  auto [a, b] = realize(sys, delta);
  Matrix closed = a;
  if (K) {
    if (K->rows() != sys.m || K->cols() != sys.n) throw InputError("K: shape must be m x n");
    closed += b * (*K);
  }
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.inputs.reserve(static_cast<std::size_t>(steps) + 1);
  Vector x = x0;
  for (int t = 0; t <= steps; ++t) {
    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      throw DivergenceError("simulate: state diverged at step " + std::to_string(t), t);
    }
    traj.states.push_back(x);
    traj.inputs.push_back(K ? Vector(*K * x) : Vector(Vector::Zero(sys.m)));
    if (t < steps) x = closed * x;
  }
  return traj;
}

TrajectoryBundle sweep(const UncertainLTI& sys, const std::optional<Matrix>& K,
                       std::span<const double> grid, const Vector& x0, int steps,
                       const std::optional<Matrix>& C) {
  if (grid.empty()) throw InputError("grid: must be non-empty");
  if (C && C->cols() != sys.n) throw InputError("C: column count must equal n");
  TrajectoryBundle bundle;
  bundle.deltas.assign(grid.begin(), grid.end());
  bundle.times.resize(static_cast<std::size_t>(steps) + 1);
  for (int t = 0; t <= steps; ++t) bundle.times[static_cast<std::size_t>(t)] = t;

  for (double delta : grid) {
    std::optional<int> diverged;
    Trajectory traj;
    try {
      traj = simulate(sys, K, delta, x0, steps);
    } catch (const DivergenceError& e) {
      diverged = e.step();
      // Keep the finite prefix so partial sweeps still plot.
      if (e.step() > 0) traj = simulate(sys, K, delta, x0, e.step() - 1);
    }
    if (C) {
      std::vector<Vector> ys;
      ys.reserve(traj.states.size());
      for (const Vector& x : traj.states) ys.push_back(*C * x);
      bundle.outputs.push_back(std::move(ys));
    }
    bundle.runs.push_back(std::move(traj));
    bundle.diverged_at.push_back(diverged);
  }
  return bundle;
}

std::vector<ControllabilityPoint> controllability_energy(const UncertainLTI& sys,
                                                         std::span<const double> grid) {
  if (grid.empty()) throw InputError("grid: must be non-empty");
  std::vector<ControllabilityPoint> out;
  out.reserve(grid.size());
  for (double delta : grid) {
    ControllabilityPoint pt;
    pt.delta = delta;
    auto [a, b] = realize(sys, delta);
    try {
      Matrix w = dlyap(a, b * b.transpose());
      // log det through Cholesky keeps large Gramians from overflowing.
      Eigen::LLT<Matrix> llt(w);
      if (llt.info() == Eigen::Success) {
        double log_det = 0.0;
        for (int i = 0; i < w.rows(); ++i) log_det += std::log(llt.matrixL()(i, i));
        pt.det_inv = std::exp(-2.0 * log_det);
        pt.defined = std::isfinite(pt.det_inv);
      }
    } catch (const InstabilityError&) {
      pt.defined = false;
    }
    out.push_back(pt);
  }
  return out;
}

SurrogateErrors surrogate_vs_mc(const UncertainLTI& sys, const std::optional<Matrix>& K,
                                int order, const Vector& x0, int steps, int samples,
                                std::uint64_t seed) {
  if (samples < 1) throw InputError("samples: must be >= 1");
  if (steps < 0) throw InputError("steps: must be non-negative");

  // Surrogate moment trajectories.
  auto [a_pc, b_pc] = build_pc_matrices(sys, order);
  ReducedModel red;
  red.A = std::move(a_pc);
  red.B = std::move(b_pc);
  red.n = sys.n;
  red.m = sys.m;
  red.order = order;
  const std::vector<PCState> traj = propagate(red, K, lift_state(x0, order), steps);

  // Monte Carlo reference: per-time mean and per-component variance.
  const std::vector<double> deltas = sample_params(samples, seed);
  Matrix mean = Matrix::Zero(sys.n, steps + 1);
  Matrix second = Matrix::Zero(sys.n, steps + 1);
  for (double delta : deltas) {
    auto [a, b] = realize(sys, delta);
    Matrix closed = a;
    if (K) closed += b * (*K);
    Vector x = x0;
    for (int t = 0; t <= steps; ++t) {
      mean.col(t) += x;
      second.col(t) += x.cwiseProduct(x);
      if (t < steps) x = closed * x;
    }
  }
  mean /= samples;
  second /= samples;

  double num_mean = 0.0, den_mean = 0.0;
  double num_var = 0.0, den_var = 0.0;
  for (int t = 0; t <= steps; ++t) {
    const StateMoments mom = surrogate_moments(traj[static_cast<std::size_t>(t)]);
    const Vector mc_mean = mean.col(t);
    const Vector mc_var = second.col(t) - mc_mean.cwiseProduct(mc_mean);
    num_mean += (mom.mean - mc_mean).squaredNorm();
    den_mean += mc_mean.squaredNorm();
    num_var += (mom.covariance.diagonal() - mc_var).squaredNorm();
    den_var += mc_var.squaredNorm();
  }
  SurrogateErrors errs;
  errs.rel_error_mean = den_mean > 0.0 ? std::sqrt(num_mean / den_mean) : std::sqrt(num_mean);
  errs.rel_error_var = den_var > 0.0 ? std::sqrt(num_var / den_var) : std::sqrt(num_var);
  return errs;
}

}  // namespace pclqr
