#include "pclqr/numerics.hpp"

#include <cmath>

#include "pclqr/errors.hpp"

namespace pclqr {

namespace {

constexpr int kMaxDoublingIterations = 200;
constexpr double kDoublingStopTol = 1e-12;

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

}  // namespace

PsdCheck is_psd(const Matrix& M, double tol) {
  if (!M.allFinite()) throw InputError("is_psd: non-finite entries");
  if (M.rows() != M.cols()) throw InputError("is_psd: matrix must be square");
  if (M.rows() == 0) return {true, 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M), Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  const double max_abs = std::max(std::abs(es.eigenvalues().minCoeff()),
                                  std::abs(es.eigenvalues().maxCoeff()));
  return {min_eig >= -tol * std::max(1.0, max_abs), min_eig};
}

Matrix psd_project(const Matrix& M) {
  if (M.rows() == 0) return M;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M));
  Vector clipped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

Matrix dlyap(const Matrix& A, const Matrix& W) {
  if (A.rows() != A.cols()) throw InputError("dlyap: A must be square");
  if (W.rows() != A.rows() || W.cols() != A.cols()) {
    throw InputError("dlyap: W must match A");
  }
  const double radius = spectrum(A).spectral_radius;
  if (radius >= 1.0 - 1e-9) {
    throw InstabilityError("dlyap: spectral radius " + std::to_string(radius) +
                           " is not below 1");
  }
  // Doubling: X_{k+1} = X_k + A_k X_k A_k', A_{k+1} = A_k^2 converges to the
  // infinite sum sum_t A^t W A'^t with quadratically shrinking remainder.
  Matrix X = symmetrize(W);
  Matrix Ak = A;
  for (int it = 0; it < kMaxDoublingIterations; ++it) {
    Matrix step = Ak * X * Ak.transpose();
    X += step;
    Ak = Ak * Ak;
    if (step.norm() <= kDoublingStopTol * std::max(1.0, X.norm())) break;
  }
  return symmetrize(X);
}

DareResult dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  if (A.cols() != n) throw InputError("dare: A must be square");
  if (B.rows() != n) throw InputError("dare: B row count must match A");
  if (Q.rows() != n || Q.cols() != n) throw InputError("dare: Q must match A");
  if (R.rows() != m || R.cols() != m) throw InputError("dare: R must match B columns");

  // Structured doubling on (A_k, G_k, H_k): H_k converges to the stabilizing P.
  Matrix G;
  if (m > 0) {
    Eigen::LDLT<Matrix> rfact(symmetrize(R));
    if (rfact.info() != Eigen::Success || !rfact.isPositive()) {
      throw InputError("dare: R must be positive definite");
    }
    G = B * rfact.solve(B.transpose());
  } else {
    G = Matrix::Zero(n, n);
  }
  Matrix Ak = A;
  Matrix H = symmetrize(Q);
  const Matrix I = Matrix::Identity(n, n);

  int it = 0;
  bool converged = false;
  for (; it < kMaxDoublingIterations; ++it) {
    Eigen::PartialPivLU<Matrix> lu(I + G * H);
    Matrix W1 = lu.solve(Ak);            // (I + G H)^{-1} A_k
    Matrix W2 = lu.solve(G);             // (I + G H)^{-1} G
    Matrix H_next = H + Ak.transpose() * H * W1;
    Matrix G_next = G + Ak * W2 * Ak.transpose();
    Matrix A_next = Ak * W1;
    if (!H_next.allFinite() || !G_next.allFinite() || !A_next.allFinite()) {
      throw SynthesisInfeasible("dare: iteration diverged (pair not stabilizable?)");
    }
    const double change = (H_next - H).norm();
    H = symmetrize(H_next);
    G = symmetrize(G_next);
    Ak = std::move(A_next);
    if (change <= kDoublingStopTol * std::max(1.0, H.norm())) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) {
    throw SynthesisInfeasible("dare: no convergence in " +
                              std::to_string(kMaxDoublingIterations) + " iterations");
  }

  Matrix P = H;
  Matrix K;
  if (m > 0) {
    Matrix S = symmetrize(R + B.transpose() * P * B);
    Eigen::LDLT<Matrix> sfact(S);
    K = -sfact.solve(B.transpose() * P * A);
  } else {
    K = Matrix::Zero(0, n);
  }

  // Residual of the closed-form equation, relative to ||P||.
  Matrix defect = A.transpose() * P * A - P + Q;
  if (m > 0) {
    defect += (B.transpose() * P * A).transpose() * K;
  }
  const double denom = std::max(1.0, P.norm());
  const double residual = defect.norm() / denom;
  if (residual > 1e-9) {
    throw SynthesisInfeasible("dare: residual " + std::to_string(residual) +
                              " above tolerance");
  }
  const double closed_radius = spectrum(m > 0 ? Matrix(A + B * K) : A).spectral_radius;
  if (closed_radius >= 1.0) {
    throw SynthesisInfeasible("dare: solution is not stabilizing (closed-loop radius " +
                              std::to_string(closed_radius) + ")");
  }
  return {std::move(P), std::move(K), residual, it};
}

SpectralResult spectrum(const Matrix& M) {
  if (M.rows() != M.cols()) throw InputError("spectrum: matrix must be square");
  if (!M.allFinite()) throw InputError("spectrum: non-finite entries");
  if (M.rows() == 0) return {ComplexVector(0), 0.0};
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  ComplexVector ev = es.eigenvalues();
  double radius = 0.0;
  for (int i = 0; i < ev.size(); ++i) radius = std::max(radius, std::abs(ev[i]));
  return {std::move(ev), radius};
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return out;
}

}  // namespace pclqr
