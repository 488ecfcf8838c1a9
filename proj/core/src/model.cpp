#include "pclqr/model.hpp"

#include <cmath>

#include "pclqr/errors.hpp"
#include "pclqr/rng.hpp"

namespace pclqr {

void UncertainLTI::validate() const {
  if (n <= 0) throw InputError("n: state dimension must be positive");
  if (m < 0) throw InputError("m: input dimension must be non-negative");
  if (basis.model_order < 0) throw InputError("basis.nOrd: must be non-negative");
  if (basis.approx_order < 0) throw InputError("basis.N: must be non-negative");
  const std::size_t want = static_cast<std::size_t>(basis.model_order) + 1;
  if (A.size() != want) {
    throw InputError("A: expected " + std::to_string(want) + " coefficient matrices, got " +
                     std::to_string(A.size()));
  }
  if (B.size() != want) {
    throw InputError("B: expected " + std::to_string(want) + " coefficient matrices, got " +
                     std::to_string(B.size()));
  }
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (A[i].rows() != n || A[i].cols() != n) {
      throw InputError("A[" + std::to_string(i) + "]: shape " + std::to_string(A[i].rows()) +
                       "x" + std::to_string(A[i].cols()) + " does not match n=" +
                       std::to_string(n));
    }
    if (!A[i].allFinite()) throw InputError("A[" + std::to_string(i) + "]: non-finite entries");
  }
  for (std::size_t i = 0; i < B.size(); ++i) {
    if (B[i].rows() != n || B[i].cols() != m) {
      throw InputError("B[" + std::to_string(i) + "]: shape " + std::to_string(B[i].rows()) +
                       "x" + std::to_string(B[i].cols()) + " does not match n=" +
                       std::to_string(n) + ", m=" + std::to_string(m));
    }
    if (!B[i].allFinite()) throw InputError("B[" + std::to_string(i) + "]: non-finite entries");
  }
}

void CostWeights::validate(int n, int m) const {
  if (Q.rows() != n || Q.cols() != n) {
    throw InputError("Q: shape must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (R.rows() != m || R.cols() != m) {
    throw InputError("R: shape must be " + std::to_string(m) + "x" + std::to_string(m));
  }
  const double qn = Q.norm();
  if ((Q - Q.transpose()).norm() > 1e-10 * std::max(1.0, qn)) {
    throw InputError("Q: not symmetric");
  }
  if ((R - R.transpose()).norm() > 1e-10 * std::max(1.0, R.norm())) {
    throw InputError("R: not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> qe(0.5 * (Q + Q.transpose()));
  if (qe.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, qn)) {
    throw InputError("Q: not positive semidefinite");
  }
  if (m > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> re(0.5 * (R + R.transpose()));
    if (re.eigenvalues().minCoeff() <= 0.0) {
      throw InputError("R: not positive definite");
    }
  }
}

std::pair<Matrix, Matrix> realize(const UncertainLTI& sys, double delta) {
  const auto phi = eval_basis(sys.basis, delta, sys.basis.model_order);
  Matrix a = Matrix::Zero(sys.n, sys.n);
  Matrix b = Matrix::Zero(sys.n, sys.m);
  for (int i = 0; i <= sys.basis.model_order; ++i) {
    a += phi[i] * sys.A[i];
    b += phi[i] * sys.B[i];
  }
  return {std::move(a), std::move(b)};
}

UncertainLTI fit_from_grid(std::span<const GridPoint> points, int model_order) {
  if (model_order < 0) throw InputError("nOrd: must be non-negative");
  const int coeff_count = model_order + 1;
  const int j_count = static_cast<int>(points.size());
  if (j_count < coeff_count) {
    throw InputError("grid: need at least " + std::to_string(coeff_count) +
                     " points for nOrd=" + std::to_string(model_order) + ", got " +
                     std::to_string(j_count));
  }
  const int n = static_cast<int>(points[0].A.rows());
  const int m = static_cast<int>(points[0].B.cols());
  BasisSpec basis{BasisFamily::legendre, model_order, model_order};

  Matrix vander(j_count, coeff_count);
  for (int j = 0; j < j_count; ++j) {
    const GridPoint& p = points[j];
    if (std::abs(p.delta) > 1.0 + 1e-12) {
      throw InputError("grid[" + std::to_string(j) + "].delta: outside [-1, 1]");
    }
    if (p.A.rows() != n || p.A.cols() != n) {
      throw InputError("grid[" + std::to_string(j) + "].A: inconsistent shape");
    }
    if (p.B.rows() != n || p.B.cols() != m) {
      throw InputError("grid[" + std::to_string(j) + "].B: inconsistent shape");
    }
    const auto phi = eval_basis(basis, p.delta, model_order);
    for (int i = 0; i < coeff_count; ++i) vander(j, i) = phi[i];
  }

  Eigen::ColPivHouseholderQR<Matrix> qr(vander);
  if (qr.rank() < coeff_count) {
    throw InputError("grid: parameter values are rank-deficient for nOrd=" +
                     std::to_string(model_order) + " (duplicated delta values?)");
  }

  // Solve one least-squares system per matrix entry, batched column-wise.
  Matrix rhs_a(j_count, n * n);
  Matrix rhs_b(j_count, n * m);
  for (int j = 0; j < j_count; ++j) {
    rhs_a.row(j) = Eigen::Map<const Eigen::RowVectorXd>(points[j].A.data(), n * n);
    rhs_b.row(j) = Eigen::Map<const Eigen::RowVectorXd>(points[j].B.data(), n * m);
  }
  Matrix sol_a = qr.solve(rhs_a);
  Matrix sol_b = qr.solve(rhs_b);

  UncertainLTI sys;
  sys.n = n;
  sys.m = m;
  sys.basis = basis;
  sys.A.reserve(coeff_count);
  sys.B.reserve(coeff_count);
  for (int i = 0; i < coeff_count; ++i) {
    Vector ra = sol_a.row(i);
    Vector rb = sol_b.row(i);
    sys.A.push_back(Eigen::Map<const Matrix>(ra.data(), n, n));
    sys.B.push_back(Eigen::Map<const Matrix>(rb.data(), n, m));
  }
  sys.validate();
  return sys;
}

double scale_param(double v, const ParamScale& scale) {
  if (!(scale.v_min < scale.v_max)) throw InputError("param_scale: vmin must be < vmax");
  if (v < scale.v_min || v > scale.v_max) {
    throw DomainError("scale_param: value " + std::to_string(v) + " outside [" +
                      std::to_string(scale.v_min) + ", " + std::to_string(scale.v_max) + "]");
  }
  return (2.0 * v - (scale.v_max + scale.v_min)) / (scale.v_max - scale.v_min);
}

std::vector<double> sample_params(int count, std::uint64_t seed) {
  if (count < 1) throw InputError("samples: count must be >= 1");
  SplitMix64 gen(seed);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& v : out) v = gen.uniform_pm1();
  return out;
}

}  // namespace pclqr
