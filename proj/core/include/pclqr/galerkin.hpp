#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pclqr/model.hpp"
#include "pclqr/types.hpp"

namespace pclqr {

/// Deterministic Galerkin surrogate of the random closed loop. States are the
/// stacked PC coefficients x_pc = vec([x_0 ... x_N]); block i of A holds the
/// coupling from coefficient j to coefficient i. A fixed gain K acts blockwise
/// as I_{N+1} (x) K.
struct ReducedModel {
  Matrix A;  ///< n(N+1) x n(N+1)
  Matrix B;  ///< n(N+1) x m(N+1)
  Matrix Q;  ///< n(N+1), equals G (x) Q of the plant weights
  Matrix R;  ///< m(N+1), equals G (x) R
  int n = 0;
  int m = 0;
  int order = 0;  ///< N
  /// Set when N < nOrd: products alias heavily below the model order.
  bool truncation_warning = false;
};

/// Stacked PC coefficient vector of length n(N+1); block i is coefficient x_i.
struct PCState {
  Vector coeffs;
  int n = 0;

  int order() const { return n > 0 ? static_cast<int>(coeffs.size()) / n - 1 : 0; }
  Vector block(int i) const { return coeffs.segment(static_cast<Eigen::Index>(i) * n, n); }
};

struct StateMoments {
  Vector mean;
  Matrix covariance;
};

/// Galerkin projections of A(delta) and B(delta) alone (no cost weights).
std::pair<Matrix, Matrix> build_pc_matrices(const UncertainLTI& sys, int order);

/// Full surrogate including the block-expanded cost weights.
ReducedModel build_reduced(const UncertainLTI& sys, const CostWeights& w, int order);

/// Embeds a deterministic initial condition: block 0 = x0, higher blocks zero.
PCState lift_state(const Vector& x0, int order);

/// Iterates x_pc^{t+1} = (A + B (I (x) K)) x_pc^t for `steps` steps; K absent
/// means open loop. Throws DivergenceError at the first non-finite state.
std::vector<PCState> propagate(const ReducedModel& red, const std::optional<Matrix>& K,
                               const PCState& x, int steps);

/// Evaluates the expansion sum_i x_i phi_i(delta).
Vector reconstruct(const PCState& x, double delta);

/// Mean and covariance implied by the PC coefficients: mean = x_0,
/// covariance = sum_{i>=1} x_i x_i' / (2i+1).
StateMoments surrogate_moments(const PCState& x);

/// Max over basis indices i <= N of ||E[e(delta) phi_i(delta)]||_inf, where e
/// is the one-step surrogate defect against the exact realized dynamics,
/// integrated on a quadrature grid sharp enough to be exact.
double galerkin_residual(const UncertainLTI& sys, const ReducedModel& red,
                         const std::optional<Matrix>& K, const PCState& x);

}  // namespace pclqr
