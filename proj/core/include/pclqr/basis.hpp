#pragma once

#include <span>
#include <vector>

#include "pclqr/types.hpp"

namespace pclqr {

enum class BasisFamily { legendre };

/// Orthogonal polynomial basis on the uniform density over [-1, 1].
///
/// The Legendre polynomials are used unnormalized (P_k(1) = 1), so the Gram
/// matrix E[phi_i phi_j] is diagonal with entries 1/(2i+1) rather than the
/// identity. The density weight 1/2 is folded into every quadrature rule, so
/// expectations are plain weighted sums.
struct BasisSpec {
  BasisFamily family = BasisFamily::legendre;
  /// nOrd: highest basis index used to represent A(delta), B(delta).
  int model_order = 0;
  /// N: highest basis index in the state expansion.
  int approx_order = 0;
};

struct QuadratureRule {
  Vector nodes;    ///< ascending, inside [-1, 1]
  Vector weights;  ///< density-normalized: sum to 1
};

/// Dense tensor of expectations E[phi_{i1} ... phi_{ik}] of basis-function
/// products, fully symmetric under index permutation. Arities 2, 3, 4 and 6
/// are supported; entries below 1e-14 in magnitude are snapped to exact zero
/// so parity zeros stay exact.
class MomentTensor {
 public:
  MomentTensor(int arity, int max_index, std::vector<double> entries);

  int arity() const { return arity_; }
  int max_index() const { return dim_ - 1; }

  double operator()(std::span<const int> idx) const;

  double at(int i, int j) const { return entries_[i * dim_ + j]; }
  double at(int i, int j, int k) const { return entries_[(i * dim_ + j) * dim_ + k]; }
  double at(int i, int j, int k, int l) const {
    return entries_[((i * dim_ + j) * dim_ + k) * dim_ + l];
  }
  double at(int i, int j, int k, int m, int n, int l) const {
    return entries_[((((i * dim_ + j) * dim_ + k) * dim_ + m) * dim_ + n) * dim_ + l];
  }

  const std::vector<double>& entries() const { return entries_; }

 private:
  int arity_;
  int dim_;
  std::vector<double> entries_;
};

/// Evaluates (phi_0(delta), ..., phi_{up_to}(delta)) by the three-term
/// Legendre recurrence. Overshoot of [-1, 1] up to 1e-12 is clamped; anything
/// beyond throws DomainError.
std::vector<double> eval_basis(const BasisSpec& spec, double delta, int up_to);

/// Gauss-Legendre rule on [-1, 1] with weights rescaled by the density 1/2.
/// Exact for polynomial integrands of degree <= 2*point_count - 1.
QuadratureRule quadrature_rule(int point_count);

/// Expectation tensor of order-`arity` basis products up to `max_index`, each
/// entry integrated by a quadrature rule sharp enough to be exact to rounding.
MomentTensor moment_tensor(const BasisSpec& spec, int arity, int max_index);

/// Gram matrix E[Phi Phi^T] of size (order+1): diag(1, 1/3, ..., 1/(2*order+1)).
Matrix gram(const BasisSpec& spec, int order);

}  // namespace pclqr
