#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pclqr/basis.hpp"
#include "pclqr/types.hpp"

namespace pclqr {

/// Discrete-time plant x^{t+1} = A(delta) x^t + B(delta) u^t whose matrices
/// are polynomial-chaos expansions A(delta) = sum_i A[i] phi_i(delta) in the
/// basis of `basis`, with exactly model_order+1 coefficient matrices.
struct UncertainLTI {
  int n = 0;  ///< state dimension
  int m = 0;  ///< input dimension
  BasisSpec basis;
  std::vector<Matrix> A;  ///< model_order+1 matrices, each n x n
  std::vector<Matrix> B;  ///< model_order+1 matrices, each n x m
  std::string name;

  /// Throws InputError naming the offending field.
  void validate() const;
};

/// Quadratic stage-cost weights. When the output map C and output weight Qy
/// are supplied, Q = C^T Qy C.
struct CostWeights {
  Matrix Q;  ///< n x n, symmetric PSD
  Matrix R;  ///< m x m, symmetric PD
  std::optional<Matrix> C;   ///< p x n output map
  std::optional<Matrix> Qy;  ///< p x p output weight

  void validate(int n, int m) const;
};

/// Affine map from a physical parameter range [v_min, v_max] onto [-1, 1].
struct ParamScale {
  double v_min = -1.0;
  double v_max = 1.0;
};

/// One gridded linear model (A_j, B_j) taken at parameter value delta_j.
struct GridPoint {
  double delta;
  Matrix A;
  Matrix B;
};

/// A(delta), B(delta) evaluated at one parameter value.
std::pair<Matrix, Matrix> realize(const UncertainLTI& sys, double delta);

/// Least-squares fit of PC coefficients through gridded models; exact
/// interpolation when the point count equals model_order+1. Needs at least
/// model_order+1 distinct parameter values.
UncertainLTI fit_from_grid(std::span<const GridPoint> points, int model_order);

/// (2v - (v_max + v_min)) / (v_max - v_min); endpoints map to -1 and +1.
double scale_param(double v, const ParamScale& scale);

/// Seeded uniform samples in [-1, 1]; identical seed gives an identical
/// sequence on every platform (SplitMix64, see rng.hpp).
std::vector<double> sample_params(int count, std::uint64_t seed);

}  // namespace pclqr
