#include "gran/numerics.hpp"

#include <limits>
#include <string>

namespace gran {

void require_finite(const Matrix& a, const char* name) {
  if (!a.allFinite()) {
    throw ArgumentError(std::string(name) + " contains non-finite entries");
  }
}

SvdFactors svd(const Matrix& a) {
  require_finite(a, "svd input");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (dec.info() != Eigen::Success) {
    // The backend does not expose its sweep count.
    throw SvdError("SVD did not converge for " + std::to_string(a.rows()) +
                       "x" + std::to_string(a.cols()) + " matrix",
                   -1);
  }
  return SvdFactors{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix pinv(const Matrix& a, double tol) {
  if (tol < 0) {
    tol = static_cast<double>(std::max(a.rows(), a.cols())) * 1e-12;
  }
  SvdFactors f = svd(a);
  const double cutoff = f.singulars.size() > 0 ? tol * f.singulars(0) : 0.0;
  const Eigen::Index r = f.singulars.size();
  Vector inv = Vector::Zero(r);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (f.singulars(i) > cutoff && f.singulars(i) > 0) {
      inv(i) = 1.0 / f.singulars(i);
    }
  }
  return f.right.leftCols(r) * inv.asDiagonal() * f.left.leftCols(r).transpose();
}

double condition_estimate(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> dec(a);
  const Vector& s = dec.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 0) {
    return std::numeric_limits<double>::infinity();
  }
  return s(0) / s(s.size() - 1);
}

}  // namespace gran
