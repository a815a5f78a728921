#include "gran/granulation.hpp"

#include <cmath>
#include <string>

namespace gran {

Vector phi_of(const Matrix& u, double m) {
  const Vector sums = u.array().pow(m).rowwise().sum();
  for (Eigen::Index j = 0; j < sums.size(); ++j) {
    if (sums(j) <= 0) {
      throw DegenerateClusterError(
          "cluster " + std::to_string(j) + " has zero membership weight",
          static_cast<int>(j));
    }
  }
  return sums.cwiseInverse();
}

Matrix granulate(const Matrix& x, const Matrix& u, double m) {
  if (u.cols() != x.rows()) {
    throw DimensionError("granulate: U has " + std::to_string(u.cols()) +
                         " columns but X has " + std::to_string(x.rows()) +
                         " rows");
  }
  const Vector phi = phi_of(u, m);
  return phi.asDiagonal() * (u.array().pow(m).matrix() * x);
}

DegranulationModel degranulation_model(const Matrix& x, const Matrix& u,
                                       const Matrix& v, double m,
                                       const NormalizationStats& stds) {
  const Eigen::Index N = x.rows();
  const Eigen::Index C = v.rows();
  if (u.rows() != C || u.cols() != N) {
    throw DimensionError("degranulation_model: U shape does not match X, V");
  }

  DegranulationModel dm;
  const Matrix um_t = u.array().pow(m).transpose();  // N x C
  dm.theta = um_t.rowwise().sum().cwiseInverse();
  dm.omega = dm.theta.asDiagonal() * um_t;

  // Clamped distances feed the negative powers of the curvature factors.
  const Matrix d = pairwise_distance2(x, v, stds).cwiseSqrt().cwiseMax(kDistanceClamp);
  dm.xi = d.array().pow(-2.0 * m / (m - 1.0));
  dm.psi.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double s = d.row(i).array().pow(-2.0 / (m - 1.0)).sum();
    dm.psi(i) = std::pow(s, -m);
  }
  dm.a = dm.psi.cwiseProduct(dm.theta);
  return dm;
}

Matrix degranulate(const Matrix& u, const Matrix& v, double m) {
  if (u.rows() != v.rows()) {
    throw DimensionError("degranulate: U has " + std::to_string(u.rows()) +
                         " rows but V has " + std::to_string(v.rows()));
  }
  const Matrix um_t = u.array().pow(m).transpose();  // N x C
  const Vector row_sums = um_t.rowwise().sum();
  for (Eigen::Index i = 0; i < row_sums.size(); ++i) {
    if (row_sums(i) <= 0) {
      throw ArgumentError("datum " + std::to_string(i) +
                          " has zero membership weight");
    }
  }
  return row_sums.cwiseInverse().asDiagonal() * (um_t * v);
}

}  // namespace gran
