#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pclqr/basis.hpp"
#include "pclqr/model.hpp"
#include "pclqr/numerics.hpp"
#include "pclqr/types.hpp"

namespace pclqr {

/// Outcome of the exponential-mean-square feasibility search. `feasible`
/// asserts the existence of a block Lyapunov matrix P_bar >= I whose moment
/// inequality matrix is negative definite (margin = its largest eigenvalue).
/// Infeasible means no certificate was found, not a proof of instability.
struct StabilityCertificate {
  Matrix P_bar;  ///< n(N+1) symmetric, >= I when feasible
  double margin = 0.0;
  double pbar_min_eig = 0.0;
  int order = 0;
  bool feasible = false;
};

struct SecondMomentTrace {
  std::vector<double> moments;  ///< E[||x^t||^2], t = 0..steps
  int divergent_samples = 0;
  std::optional<int> first_divergence_step;
};

/// Coefficients of the closed loop A(delta) + B(delta) K in the shared basis:
/// A_m + B_m K per index m (A_m alone when K is absent).
std::vector<Matrix> closed_loop_coeffs(const UncertainLTI& sys,
                                       const std::optional<Matrix>& K);

/// Linear map from the block Lyapunov matrix P_bar to the moment inequality
/// matrix, assembled from the arity-6 and arity-4 expectation tensors:
///   W_il = sum_{jk} sum_{mn} E[phi_i phi_j phi_k phi_m phi_n phi_l] C_m' P_jk C_n
///        - sum_{jk} E[phi_i phi_j phi_k phi_l] P_jk.
/// Caches the tensors so repeated evaluation (the feasibility search) is cheap.
class EmsOperator {
 public:
  EmsOperator(std::vector<Matrix> coeffs, const BasisSpec& spec, int order);

  /// W(P_bar), symmetrized.
  Matrix apply(const Matrix& P_bar) const;

  /// Adjoint map: <apply(P), V> = <P, adjoint(V)> for symmetric arguments.
  Matrix adjoint(const Matrix& V) const;

  int dimension() const { return n_ * (order_ + 1); }
  int order() const { return order_; }

 private:
  Matrix map_with(const std::vector<Matrix>& coeffs, const Matrix& P_bar) const;

  std::vector<Matrix> coeffs_;
  std::vector<Matrix> coeffs_t_;  // transposed, for the adjoint
  MomentTensor t6_;
  MomentTensor t4_;
  int n_;
  int order_;
};

/// One-shot assembly of the moment inequality matrix for the given closed-loop
/// coefficients and block Lyapunov matrix.
Matrix assemble_w(const std::vector<Matrix>& coeffs, const Matrix& P_bar,
                  const BasisSpec& spec, int order);

/// Searches the spectahedron {P_bar >= I, tr P_bar <= tau} for a certificate
/// by projected subgradient descent on the largest eigenvalue of the moment
/// inequality matrix. Feasible once the margin drops below -1e-8; gives up
/// after 400 iterations. Deterministic.
StabilityCertificate certify_ems(const UncertainLTI& sys, const std::optional<Matrix>& K,
                                 int order);

/// Monte Carlo estimate of E[||x^t||^2] under sampled parameters; the
/// empirical validation oracle for certificates. Divergent samples are counted
/// and the first non-finite step recorded.
SecondMomentTrace mc_second_moment(const UncertainLTI& sys, const std::optional<Matrix>& K,
                                   int samples, int steps, std::uint64_t seed,
                                   const Vector& x0);

/// Closed-loop eigenvalues of the realized system per grid point.
std::vector<SpectralResult> pole_sweep(const UncertainLTI& sys,
                                       const std::optional<Matrix>& K,
                                       std::span<const double> grid);

}  // namespace pclqr
