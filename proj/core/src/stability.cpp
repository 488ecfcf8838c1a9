#include "pclqr/stability.hpp"

#include <cmath>
#include <limits>

#include "pclqr/errors.hpp"

namespace pclqr {

namespace {

constexpr double kFeasibleMargin = -1e-8;
constexpr int kMaxSubgradientIterations = 400;

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

/// Projection onto {X >= I, tr X <= tau}: eigenvalues clipped at one, then the
/// part above the identity shrunk when the trace budget is exceeded.
Matrix project_spectahedron(const Matrix& X, double tau) {
  const int dim = static_cast<int>(X.rows());
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(X));
  Vector clipped = es.eigenvalues().cwiseMax(1.0);
  Matrix Y = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  const double tr = Y.trace();
  if (tr > tau) {
    const double keep = (tau - dim) / (tr - dim);
    Y = Matrix::Identity(dim, dim) + keep * (Y - Matrix::Identity(dim, dim));
  }
  return symmetrize(Y);
}

/// Fixed point of P = sum_m C_m' P C_m / (2m+1) + I, the order-zero version of
/// the moment inequality. A bounded partial iterate is still returned when the
/// cap is reached: it makes a usable descent start even short of convergence.
std::optional<Matrix> stein_warm_start(const std::vector<Matrix>& coeffs, int n) {
  Matrix P = Matrix::Identity(n, n);
  for (int it = 0; it < 20000; ++it) {
    Matrix next = Matrix::Identity(n, n);
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
      next += coeffs[m].transpose() * P * coeffs[m] / (2.0 * m + 1.0);
    }
    if (!next.allFinite() || next.norm() > 1e12) return std::nullopt;
    const double change = (next - P).norm();
    P = symmetrize(next);
    if (change <= 1e-12 * std::max(1.0, P.norm())) break;
  }
  return P;
}

}  // namespace

std::vector<Matrix> closed_loop_coeffs(const UncertainLTI& sys,
                                       const std::optional<Matrix>& K) {
  std::vector<Matrix> coeffs;
  coeffs.reserve(sys.A.size());
  for (std::size_t m = 0; m < sys.A.size(); ++m) {
    if (K) {
      coeffs.push_back(sys.A[m] + sys.B[m] * (*K));
    } else {
      coeffs.push_back(sys.A[m]);
    }
  }
  return coeffs;
}

EmsOperator::EmsOperator(std::vector<Matrix> coeffs, const BasisSpec& spec, int order)
    : coeffs_(std::move(coeffs)),
      t6_(moment_tensor(spec, 6, std::max(order, static_cast<int>(coeffs_.size()) - 1))),
      t4_(moment_tensor(spec, 4, order)),
      n_(static_cast<int>(coeffs_.front().rows())),
      order_(order) {
  coeffs_t_.reserve(coeffs_.size());
  for (const Matrix& c : coeffs_) coeffs_t_.push_back(c.transpose());
}

Matrix EmsOperator::map_with(const std::vector<Matrix>& coeffs, const Matrix& P_bar) const {
  const int blocks = order_ + 1;
  const int n_ord = static_cast<int>(coeffs.size()) - 1;
  Matrix W = Matrix::Zero(static_cast<Eigen::Index>(n_) * blocks,
                          static_cast<Eigen::Index>(n_) * blocks);
  std::vector<Matrix> products(static_cast<std::size_t>(n_ord + 1) * (n_ord + 1));
  for (int j = 0; j < blocks; ++j) {
    for (int k = 0; k < blocks; ++k) {
      const Matrix p_jk = P_bar.block(static_cast<Eigen::Index>(j) * n_,
                                      static_cast<Eigen::Index>(k) * n_, n_, n_);
      for (int m = 0; m <= n_ord; ++m) {
        for (int n2 = 0; n2 <= n_ord; ++n2) {
          products[static_cast<std::size_t>(m) * (n_ord + 1) + n2] =
              coeffs[m].transpose() * p_jk * coeffs[n2];
        }
      }
      for (int i = 0; i < blocks; ++i) {
        for (int l = 0; l < blocks; ++l) {
          Matrix acc = Matrix::Zero(n_, n_);
          for (int m = 0; m <= n_ord; ++m) {
            for (int n2 = 0; n2 <= n_ord; ++n2) {
              const double c6 = t6_.at(i, j, k, m, n2, l);
              if (c6 == 0.0) continue;
              acc += c6 * products[static_cast<std::size_t>(m) * (n_ord + 1) + n2];
            }
          }
          const double c4 = t4_.at(i, j, k, l);
          if (c4 != 0.0) acc -= c4 * p_jk;
          W.block(static_cast<Eigen::Index>(i) * n_, static_cast<Eigen::Index>(l) * n_, n_,
                  n_) += acc;
        }
      }
    }
  }
  return symmetrize(W);
}

Matrix EmsOperator::apply(const Matrix& P_bar) const { return map_with(coeffs_, P_bar); }

Matrix EmsOperator::adjoint(const Matrix& V) const {
  // The adjoint is the same contraction with transposed coefficients; the
  // tensors are permutation-symmetric so the index roles swap freely.
  return map_with(coeffs_t_, V);
}

Matrix assemble_w(const std::vector<Matrix>& coeffs, const Matrix& P_bar,
                  const BasisSpec& spec, int order) {
  if (coeffs.empty()) throw InputError("coeffs: need at least one coefficient matrix");
  const int dim = static_cast<int>(coeffs.front().rows()) * (order + 1);
  if (P_bar.rows() != dim || P_bar.cols() != dim) {
    throw InputError("P_bar: shape must be n(N+1) square");
  }
  return EmsOperator(coeffs, spec, order).apply(symmetrize(P_bar));
}

StabilityCertificate certify_ems(const UncertainLTI& sys, const std::optional<Matrix>& K,
                                 int order) {
  if (order < 0) throw InputError("N: approximation order must be non-negative");
  const std::vector<Matrix> coeffs = closed_loop_coeffs(sys, K);
  const EmsOperator op(coeffs, sys.basis, order);
  const int dim = op.dimension();
  const double tau = 1e5 * dim;

  // Starting points: identity, and the order-zero mean-square fixed point
  // replicated down the block diagonal when it exists.
  std::vector<Matrix> starts;
  starts.push_back(Matrix::Identity(dim, dim));
  if (auto stein = stein_warm_start(coeffs, sys.n)) {
    Matrix warm = Matrix::Identity(dim, dim);
    for (int i = 0; i <= order; ++i) {
      warm.block(static_cast<Eigen::Index>(i) * sys.n, static_cast<Eigen::Index>(i) * sys.n,
                 sys.n, sys.n) = *stein;
    }
    starts.push_back(project_spectahedron(warm, tau));
  }

  Matrix best_p;
  double best_margin = std::numeric_limits<double>::infinity();
  auto consider = [&](const Matrix& p, double margin) {
    if (margin < best_margin) {
      best_margin = margin;
      best_p = p;
    }
  };

  Matrix p = starts[0];
  {
    double margin0 = std::numeric_limits<double>::infinity();
    for (const Matrix& s : starts) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(op.apply(s), Eigen::EigenvaluesOnly);
      const double margin = es.eigenvalues().maxCoeff();
      consider(s, margin);
      if (margin < margin0) {
        margin0 = margin;
        p = s;
      }
    }
  }

  for (int it = 0; it < kMaxSubgradientIterations && best_margin >= kFeasibleMargin; ++it) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.apply(p));
    const int top = dim - 1;  // ascending eigenvalues
    const double margin = es.eigenvalues()[top];
    consider(p, margin);
    if (margin < kFeasibleMargin) break;

    const Vector v = es.eigenvectors().col(top);
    Matrix grad = op.adjoint(v * v.transpose());
    const double gnorm = grad.norm();
    if (gnorm < 1e-14) break;  // flat: nothing more to gain
    const double step = (1.0 + p.operatorNorm()) * 0.5 / std::sqrt(it + 1.0);
    p = project_spectahedron(p - (step / gnorm) * grad, tau);
  }

  StabilityCertificate cert;
  cert.P_bar = best_p;
  cert.margin = best_margin;
  cert.order = order;
  Eigen::SelfAdjointEigenSolver<Matrix> pe(best_p, Eigen::EigenvaluesOnly);
  cert.pbar_min_eig = pe.eigenvalues().minCoeff();
  cert.feasible = best_margin < kFeasibleMargin && cert.pbar_min_eig > 0.0;
  return cert;
}

SecondMomentTrace mc_second_moment(const UncertainLTI& sys, const std::optional<Matrix>& K,
                                   int samples, int steps, std::uint64_t seed,
                                   const Vector& x0) {
  if (samples < 1) throw InputError("samples: must be >= 1");
  if (steps < 0) throw InputError("steps: must be non-negative");
  const std::vector<double> deltas = sample_params(samples, seed);

  SecondMomentTrace trace;
  trace.moments.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  for (double delta : deltas) {
    auto [a, b] = realize(sys, delta);
    Matrix closed = a;
    if (K) closed += b * (*K);
    Vector x = x0;
    bool diverged = false;
    for (int t = 0; t <= steps; ++t) {
      const double sq = x.squaredNorm();
      if (!std::isfinite(sq)) {
        if (!trace.first_divergence_step) trace.first_divergence_step = t;
        if (!diverged) {
          ++trace.divergent_samples;
          diverged = true;
        }
        trace.moments[t] = std::numeric_limits<double>::infinity();
      } else {
        trace.moments[t] += sq;
      }
      if (t < steps) x = closed * x;
    }
  }
  for (auto& v : trace.moments) v /= samples;
  return trace;
}

std::vector<SpectralResult> pole_sweep(const UncertainLTI& sys,
                                       const std::optional<Matrix>& K,
                                       std::span<const double> grid) {
  if (grid.empty()) throw InputError("grid: must be non-empty");
  std::vector<SpectralResult> out;
  out.reserve(grid.size());
  for (double delta : grid) {
    auto [a, b] = realize(sys, delta);
    if (K) {
      out.push_back(spectrum(a + b * (*K)));
    } else {
      out.push_back(spectrum(a));
    }
  }
  return out;
}

}  // namespace pclqr
