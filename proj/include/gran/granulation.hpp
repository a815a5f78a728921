#pragma once

#include "gran/data.hpp"
#include "gran/fcm.hpp"

namespace gran {

/// Distances below this are clamped before the negative-power
/// evaluations in psi/xi; entries diverge as a datum approaches a
/// prototype.
inline constexpr double kDistanceClamp = 1e-12;

/// Diagonal factors of the baseline degranulation decomposition
/// X_hat = Theta (U^m)^T V and its curvature factorization
/// (U^m)^T = Psi Xi.
struct DegranulationModel {
  Vector theta;  // N, entries 1 / sum_j mu_ij^m
  Matrix omega;  // N x C, row-stochastic: Theta (U^m)^T
  Vector psi;    // N, [sum_t d_it^(-2/(m-1))]^(-m)
  Matrix xi;     // N x C, fuzzy curvature: d_ij^(-2m/(m-1))
  Vector a;      // N, product psi * theta
};

/// Diagonal of Phi: reciprocal row sums of U^m. Throws
/// DegenerateClusterError on a zero weight sum.
Vector phi_of(const Matrix& u, double m);

/// Matrix-form prototype computation V = Phi U^m X; agrees with
/// update_prototypes.
Matrix granulate(const Matrix& x, const Matrix& u, double m);

/// All degranulation factors for a fitted (u, v) pair.
DegranulationModel degranulation_model(const Matrix& x, const Matrix& u,
                                       const Matrix& v, double m,
                                       const NormalizationStats& stds);

/// Baseline reconstruction X_hat = Theta (U^m)^T V: each row is the
/// membership-weighted mean of the prototypes.
Matrix degranulate(const Matrix& u, const Matrix& v, double m);

}  // namespace gran
