#pragma once

#include <Eigen/Dense>

#include "gran/error.hpp"

namespace gran {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Full SVD factors A = left * diag(singulars) * right^T.
///
/// `left` is rows x rows, `right` is cols x cols (full, not thin: the
/// total-least-squares step needs the trailing right-singular columns).
/// Singular values are non-negative and sorted non-increasing.
struct SvdFactors {
  Matrix left;
  Vector singulars;
  Matrix right;
};

/// Full singular value decomposition of a dense matrix.
/// Throws SvdError if the factorization does not converge.
SvdFactors svd(const Matrix& a);

/// Moore-Penrose pseudo-inverse built from the SVD, zeroing singular
/// values below tol * sigma_max. tol < 0 selects the default
/// max(rows, cols) * 1e-12.
Matrix pinv(const Matrix& a, double tol = -1.0);

/// Ratio of largest to smallest singular value; +inf when singular.
double condition_estimate(const Matrix& a);

/// Throws ArgumentError when a contains NaN or Inf.
void require_finite(const Matrix& a, const char* name);

}  // namespace gran
