#pragma once

#include "pclqr/types.hpp"

namespace pclqr {

struct SpectralResult {
  ComplexVector eigenvalues;
  double spectral_radius = 0.0;
};

struct PsdCheck {
  bool psd = false;
  double min_eig = 0.0;
};

struct DareResult {
  Matrix P;         ///< stabilizing solution, symmetric PSD
  Matrix K;         ///< gain for u = Kx, i.e. K = -(R + B'PB)^{-1} B'PA
  double residual;  ///< Frobenius norm of the Riccati defect, relative to ||P||
  int iterations;
};

/// True iff the smallest eigenvalue of the symmetrized input is
/// >= -tol * max(1, ||M||_2). Also reports that eigenvalue.
PsdCheck is_psd(const Matrix& M, double tol);

/// Nearest PSD matrix in Frobenius norm (eigenvalue clipping at zero).
Matrix psd_project(const Matrix& M);

/// Solves X = A X A' + W by doubling. Requires spectral radius of A below
/// 1 - 1e-9; throws InstabilityError otherwise.
Matrix dlyap(const Matrix& A, const Matrix& W);

/// Stabilizing solution of the discrete algebraic Riccati equation
///   P = A'PA - A'PB (R + B'PB)^{-1} B'PA + Q
/// by the structured doubling algorithm. Throws SynthesisInfeasible when the
/// iteration does not converge to a stabilizing solution.
DareResult dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// All eigenvalues plus the spectral radius.
SpectralResult spectrum(const Matrix& M);

/// Kronecker product A (x) B.
Matrix kron(const Matrix& A, const Matrix& B);

}  // namespace pclqr
