#include "pclqr/galerkin.hpp"

#include <cmath>

#include "pclqr/errors.hpp"
#include "pclqr/numerics.hpp"

namespace pclqr {

std::pair<Matrix, Matrix> build_pc_matrices(const UncertainLTI& sys, int order) {
  if (order < 0) throw InputError("N: approximation order must be non-negative");
  const int n = sys.n;
  const int m = sys.m;
  const int blocks = order + 1;
  const int n_ord = sys.basis.model_order;

  // Triple-product expectations E[phi_i phi_j phi_k] with i, j <= N, k <= nOrd.
  const MomentTensor t3 = moment_tensor(sys.basis, 3, std::max(order, n_ord));

  Matrix a_pc = Matrix::Zero(static_cast<Eigen::Index>(n) * blocks,
                             static_cast<Eigen::Index>(n) * blocks);
  Matrix b_pc = Matrix::Zero(static_cast<Eigen::Index>(n) * blocks,
                             static_cast<Eigen::Index>(m) * blocks);
  for (int i = 0; i < blocks; ++i) {
    const double gram_inv = 2.0 * i + 1.0;  // 1 / E[phi_i^2]
    for (int j = 0; j < blocks; ++j) {
      Matrix a_block = Matrix::Zero(n, n);
      Matrix b_block = Matrix::Zero(n, m);
      for (int k = 0; k <= n_ord; ++k) {
        const double c = t3.at(i, j, k);
        if (c == 0.0) continue;
        a_block += c * sys.A[k];
        b_block += c * sys.B[k];
      }
      a_pc.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n, n, n) =
          gram_inv * a_block;
      b_pc.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * m, n, m) =
          gram_inv * b_block;
    }
  }
  return {std::move(a_pc), std::move(b_pc)};
}

ReducedModel build_reduced(const UncertainLTI& sys, const CostWeights& w, int order) {
  w.validate(sys.n, sys.m);
  ReducedModel red;
  std::tie(red.A, red.B) = build_pc_matrices(sys, order);
  const Matrix g = gram(sys.basis, order);
  red.Q = kron(g, w.Q);
  red.R = kron(g, w.R);
  red.n = sys.n;
  red.m = sys.m;
  red.order = order;
  red.truncation_warning = order < sys.basis.model_order;
  return red;
}

PCState lift_state(const Vector& x0, int order) {
  if (!x0.allFinite()) throw InputError("x0: non-finite entries");
  if (order < 0) throw InputError("N: approximation order must be non-negative");
  const int n = static_cast<int>(x0.size());
  Vector coeffs = Vector::Zero(static_cast<Eigen::Index>(n) * (order + 1));
  coeffs.head(n) = x0;
  return {std::move(coeffs), n};
}

std::vector<PCState> propagate(const ReducedModel& red, const std::optional<Matrix>& K,
                               const PCState& x, int steps) {
  if (steps < 0) throw InputError("steps: must be non-negative");
  if (x.coeffs.size() != red.A.rows()) {
    throw InputError("x_pc: length does not match the reduced model");
  }
  Matrix closed = red.A;
  if (K) {
    if (K->rows() != red.m || K->cols() != red.n) {
      throw InputError("K: shape must be m x n");
    }
    closed += red.B * kron(Matrix::Identity(red.order + 1, red.order + 1), *K);
  }
  std::vector<PCState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(x);
  for (int t = 1; t <= steps; ++t) {
    Vector next = closed * out.back().coeffs;
    if (!next.allFinite()) {
      throw DivergenceError("propagate: non-finite state at step " + std::to_string(t), t);
    }
    out.push_back({std::move(next), red.n});
  }
  return out;
}

Vector reconstruct(const PCState& x, double delta) {
  const int order = x.order();
  BasisSpec spec;
  const auto phi = eval_basis(spec, delta, order);
  Vector out = Vector::Zero(x.n);
  for (int i = 0; i <= order; ++i) out += phi[i] * x.block(i);
  return out;
}

StateMoments surrogate_moments(const PCState& x) {
  const int order = x.order();
  StateMoments mom;
  mom.mean = x.block(0);
  mom.covariance = Matrix::Zero(x.n, x.n);
  for (int i = 1; i <= order; ++i) {
    Vector xi = x.block(i);
    mom.covariance += (xi * xi.transpose()) / (2.0 * i + 1.0);
  }
  return mom;
}

double galerkin_residual(const UncertainLTI& sys, const ReducedModel& red,
                         const std::optional<Matrix>& K, const PCState& x) {
  const int order = red.order;
  const int n_ord = sys.basis.model_order;
  // e(delta) phi_i has degree at most nOrd + 2N.
  const int degree = n_ord + 2 * order;
  const QuadratureRule rule = quadrature_rule((degree + 1 + 1) / 2 + 1);

  const PCState next = propagate(red, K, x, 1).back();

  Matrix projections = Matrix::Zero(sys.n, order + 1);
  for (int q = 0; q < rule.nodes.size(); ++q) {
    const double delta = rule.nodes[q];
    auto [a, b] = realize(sys, delta);
    Matrix closed = a;
    if (K) closed += b * (*K);
    Vector err = reconstruct(next, delta) - closed * reconstruct(x, delta);
    const auto phi = eval_basis(sys.basis, delta, order);
    for (int i = 0; i <= order; ++i) {
      projections.col(i) += rule.weights[q] * phi[i] * err;
    }
  }
  double worst = 0.0;
  for (int i = 0; i <= order; ++i) {
    worst = std::max(worst, projections.col(i).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace pclqr
