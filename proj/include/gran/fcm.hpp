#pragma once

#include <cstdint>
#include <vector>

#include "gran/data.hpp"
#include "gran/numerics.hpp"

namespace gran {

struct FcmConfig {
  int c = 2;                // number of clusters
  double m = 2.0;           // fuzziness coefficient, > 1
  double epsilon = 1e-5;    // stop when max membership change <= epsilon
  int max_iter = 200;
  std::uint64_t seed = 0;
  int restarts = 1;         // independent seeded runs, best objective wins
};

struct FcmResult {
  Matrix u;                            // C x N partition matrix
  Matrix v;                            // C x n prototypes
  std::vector<double> objective_trace; // J after each sweep
  int iterations = 0;
  bool converged = false;
};

/// Weighted squared Euclidean distance: sum_k (x_k - v_k)^2 / sigma_k^2.
double distance2(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& v,
                 const NormalizationStats& stds);

/// All pairwise weighted squared distances, N x C.
Matrix pairwise_distance2(const Matrix& x, const Matrix& v,
                          const NormalizationStats& stds);

/// Membership update for fixed prototypes. Columns sum to 1; when a datum
/// coincides with a prototype it gets crisp membership at the
/// lowest-index such prototype.
Matrix update_partition(const Matrix& x, const Matrix& v, double m,
                        const NormalizationStats& stds);

/// Prototype update for a fixed partition: each prototype is the
/// mu^m-weighted mean of the data. Throws DegenerateClusterError when a
/// cluster's weight sum collapses.
Matrix update_prototypes(const Matrix& x, const Matrix& u, double m);

/// FCM objective J = sum_ij mu_ij^m d2(x_i, v_j).
double fcm_objective(const Matrix& x, const Matrix& u, const Matrix& v,
                     double m, const NormalizationStats& stds);

/// Alternating optimization from a seeded random partition; among
/// `restarts` runs the one with the smallest final objective wins
/// (lowest restart index on ties). Deterministic given cfg.
FcmResult fcm_fit(const Matrix& x, const FcmConfig& cfg,
                  const NormalizationStats& stds);

/// Memberships of unseen data under frozen prototypes.
Matrix membership_for(const Matrix& x_new, const Matrix& v, double m,
                      const NormalizationStats& stds);

}  // namespace gran
