#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pclqr/galerkin.hpp"
#include "pclqr/model.hpp"
#include "pclqr/stability.hpp"
#include "pclqr/types.hpp"

namespace pclqr {

/// Synthesized fixed gain with the verification record of both matrix
/// inequalities and the surrogate closed-loop spectrum.
struct GainResult {
  Matrix K;     ///< m x n, convention u = Kx (minus sign already inside)
  Matrix P_pc;  ///< n(N+1) value matrix
  double riccati_residual = 0.0;
  double lmi1_min_eig = 0.0;  ///< min eigenvalue of the value-problem block LMI
  double lmi2_gap = 0.0;      ///< achieved gain-extraction objective value
  double closed_loop_radius = 0.0;
  /// Set when the surrogate closed loop is not contractive; truncation can
  /// destabilize the surrogate at low order even when sampled loops are stable.
  bool surrogate_radius_warning = false;
  std::optional<StabilityCertificate> ems_certificate;
  int order = 0;
};

struct ValueResult {
  Matrix P;
  double riccati_residual = 0.0;
  double lmi1_min_eig = 0.0;
};

struct GainExtraction {
  Matrix K;
  double lmi2_gap = 0.0;
  double lmi2_min_eig = 0.0;  ///< min eigenvalue of the slack-form block LMI
};

struct McCost {
  double mean_cost = 0.0;
  double std_err = 0.0;
  int divergent_samples = 0;
  bool unstable_warning = false;  ///< more than 1% of samples diverged
};

struct OrderReportRow {
  int order = 0;
  double gain_norm = 0.0;
  double surrogate_radius = 0.0;
  bool feasible = false;
  std::string error;
};

/// Trace-maximal value matrix: the stabilizing Riccati solution of the
/// surrogate, verified a posteriori against the block LMI
/// [[A'PA + Q - P, A'PB], [B'PA, R + B'PB]] >= 0.
ValueResult solve_value(const ReducedModel& red);

/// Closed-form minimizer of the gain-extraction objective
///   tr (IK + S^{-1}T)' S (IK + S^{-1}T),  S = R + B'PB, T = B'PA,
/// over block-repeated gains IK = I (x) K: K = -Sbar^{-1} Tbar with Sbar, Tbar
/// the diagonal-block sums of S and T. Verifies the slack-form block LMI.
GainExtraction extract_gain(const ReducedModel& red, const Matrix& P_pc);

/// The gain-extraction objective at an arbitrary K (used for optimality
/// cross-checks).
double gain_objective(const ReducedModel& red, const Matrix& P_pc, const Matrix& K);

/// Diagonal-block sums Sbar = sum_i S_ii and Tbar = sum_i T_ii of the
/// extraction problem; the objective gradient at K is 2 (Sbar K + Tbar).
std::pair<Matrix, Matrix> extraction_normal_matrices(const ReducedModel& red,
                                                     const Matrix& P_pc);

/// Full pipeline: reduce, solve the value problem, extract the gain, examine
/// the surrogate spectrum, optionally certify the closed loop.
GainResult synthesize(const UncertainLTI& sys, const CostWeights& w, int order,
                      bool certify);

/// Monte Carlo estimate of the quadratic cost from x0 under u = Kx. The
/// horizon extends automatically until the running sum has converged, up to a
/// cap; divergent samples are flagged.
McCost mc_cost(const UncertainLTI& sys, const CostWeights& w, const Matrix& K,
               const Vector& x0, int samples, int horizon, std::uint64_t seed);

/// Synthesis swept over approximation orders; per-order failures are recorded
/// in the row rather than thrown.
std::vector<OrderReportRow> gain_vs_order(const UncertainLTI& sys, const CostWeights& w,
                                          std::span<const int> orders);

}  // namespace pclqr
