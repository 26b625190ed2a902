// Copyright 2026 the hop-predict authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an iterative numeric procedure diverges or produces
/// non-finite values (as opposed to a misuse of the API).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// State / output / input dimensions of a plant.
struct MatrixDims {
  Index n;    // state dimension
  Index m;    // output dimension
  Index n_u;  // input dimension

  bool operator==(const MatrixDims&) const = default;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

inline bool is_symmetric(const Matrix& M, double tol = 1e-10) {
  return M.rows() == M.cols() && (M - M.transpose()).cwiseAbs().maxCoeff() <= tol;
}

/// Symmetric positive definite test via Cholesky. An exactly-zero matrix is
/// not positive definite.
inline bool is_positive_definite(const Matrix& M, double sym_tol = 1e-10) {
  if (!is_symmetric(M, sym_tol)) return false;
  Eigen::LLT<Matrix> llt(0.5 * (M + M.transpose()));
  return llt.info() == Eigen::Success;
}

/// max |eigenvalue| of a square matrix.
inline double spectral_radius(const Matrix& M) {
  require(M.rows() == M.cols(), "spectral_radius: matrix must be square");
  require(M.allFinite(), "spectral_radius: matrix has non-finite entries");
  if (M.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Powers of a fixed square matrix, computed by repeated multiplication and
/// cached. pow(0) is the identity.
class MatrixPowers {
 public:
  explicit MatrixPowers(Matrix base) : base_(std::move(base)) {
    require(base_.rows() == base_.cols(), "MatrixPowers: base must be square");
    cache_.push_back(Matrix::Identity(base_.rows(), base_.cols()));
  }

  const Matrix& operator()(Index k) {
    require(k >= 0, "MatrixPowers: negative exponent");
    while (static_cast<Index>(cache_.size()) <= k)
      cache_.push_back(cache_.back() * base_);
    return cache_[static_cast<std::size_t>(k)];
  }

  const Matrix& base() const { return base_; }

 private:
  Matrix base_;
  std::vector<Matrix> cache_;
};

/// Steady-state solution of the filtering Riccati equation together with the
/// derived predictor gain.
struct RiccatiSolution {
  Matrix P;                   // state-error covariance, symmetric PD
  Matrix L;                   // predictor gain, n x m
  double closed_loop_radius;  // spectral radius of A - L C, < 1
  double residual;            // Frobenius norm of the fixed-point defect
  Index iterations;           // iterations spent by the solver
};

/// One application of the Riccati map
///   P  ->  A P A' + Q - A P C' (C P C' + R)^{-1} C P A'.
inline Matrix riccati_step(const Matrix& A, const Matrix& C, const Matrix& Q,
                           const Matrix& R, const Matrix& P) {
  const Matrix APC = A * P * C.transpose();
  const Matrix S = C * P * C.transpose() + R;
  return A * P * A.transpose() + Q - APC * S.llt().solve(APC.transpose());
}

/// Fixed-point iteration for the discrete algebraic Riccati equation of the
/// steady-state predictor, started from P = Q. Convergence is declared when
/// the Frobenius distance between successive iterates drops below `tol`;
/// failure to converge within `max_iter` signals a non-detectable pair or
/// severe ill-conditioning and is reported as NumericalError.
inline RiccatiSolution solve_dare(const Matrix& A, const Matrix& C,
                                  const Matrix& Q, const Matrix& R,
                                  double tol = 1e-12, Index max_iter = 100000) {
  const Index n = A.rows();
  const Index m = C.rows();
  require(A.rows() == A.cols(), "solve_dare: A must be square");
  require(C.cols() == n, "solve_dare: C has incompatible columns");
  require(Q.rows() == n && Q.cols() == n, "solve_dare: Q has wrong shape");
  require(R.rows() == m && R.cols() == m, "solve_dare: R has wrong shape");
  require(is_positive_definite(Q), "solve_dare: Q must be symmetric positive definite");
  require(is_positive_definite(R), "solve_dare: R must be symmetric positive definite");
  require(tol > 0 && max_iter > 0, "solve_dare: tol and max_iter must be positive");

  Matrix P = Q;
  Index used = 0;
  bool converged = false;
  for (Index it = 1; it <= max_iter; ++it) {
    Matrix next = riccati_step(A, C, Q, R, P);
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite())
      throw NumericalError("solve_dare: iteration produced non-finite values");
    const double delta = (next - P).norm();
    P = std::move(next);
    used = it;
    if (delta <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericalError(
        "solve_dare: no convergence after " + std::to_string(max_iter) +
        " iterations; the pair (A, C) may not be detectable");

  const Matrix S = C * P * C.transpose() + R;
  const Matrix L = (S.llt().solve(C * P * A.transpose())).transpose();
  const double rho = spectral_radius(A - L * C);
  if (rho >= 1.0)
    throw NumericalError("solve_dare: converged to a non-stabilizing solution");
  const double residual = (riccati_step(A, C, Q, R, P) - P).norm();
  return RiccatiSolution{P, L, rho, residual, used};
}

/// Number of singular values of M above `threshold`.
inline Index numerical_rank(const Matrix& M, double threshold) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > threshold) ++rank;
  return rank;
}

/// Size of the largest Jordan block of eigenvalue 1: the smallest j with
/// rank((A - I)^j) == rank((A - I)^{j+1}). Returns 0 when 1 is not an
/// eigenvalue. Ranks are numerical, with singular values compared against
/// tol * ||A - I||_2.
inline int estimate_unit_jordan_order(const Matrix& A, double tol = 1e-8) {
  require(A.rows() == A.cols(), "estimate_unit_jordan_order: matrix must be square");
  const Index n = A.rows();
  if (n == 0) return 0;
  const Matrix N = A - Matrix::Identity(n, n);
  const double threshold = tol * N.jacobiSvd().singularValues()[0];

  Index prev_rank = n;  // rank of (A - I)^0
  Matrix power = Matrix::Identity(n, n);
  for (int j = 1; j <= static_cast<int>(n) + 1; ++j) {
    power = power * N;
    const Index r = numerical_rank(power, threshold);
    if (r == prev_rank) return j - 1;
    prev_rank = r;
  }
  return static_cast<int>(n);
}

/// Diagnostic: does M numerically admit a full eigenvector basis? Tested by
/// the condition number of the eigenvector matrix. Never used as a gate.
inline bool is_numerically_diagonalizable(const Matrix& M, double cond_limit = 1e8) {
  require(M.rows() == M.cols(), "is_numerically_diagonalizable: matrix must be square");
  if (M.rows() == 0) return true;
  Eigen::EigenSolver<Matrix> solver(M, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) return false;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(solver.eigenvectors());
  const auto& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  if (smallest <= 0.0) return false;
  return sv[0] / smallest < cond_limit;
}

}  // namespace hop
