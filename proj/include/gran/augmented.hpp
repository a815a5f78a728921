#pragma once

#include <utility>

#include "gran/granulation.hpp"

namespace gran {

/// Numeric health report of the total-least-squares step.
struct TlsDiagnostics {
  Vector trailing_singulars;  // trailing C singular values of [Theta_hat Omega_hat]
  double g2_condition = 0.0;  // condition estimate of the C x C trailing block
  double u_hat_min = 0.0;
  double u_hat_max = 0.0;
  bool fallback = false;      // true when the direct pseudo-inverse path was taken
};

/// Everything produced by the partition-matrix correction pipeline.
struct AugmentedModel {
  Matrix omega_hat;    // N x C
  Vector lambda_hat;   // N, row-wise least-squares scale factors
  Vector theta_hat;    // N, lambda_hat / psi
  Matrix u_hat_m;      // C x N, modified membership powers
  Matrix x_hat;        // N x n, corrected reconstruction
  Matrix prototypes;   // C x n, echoed for serialization
  double m = 0.0;
  TlsDiagnostics diagnostics;
};

/// How the final reconstruction is scaled. `theta_hat` composes back to
/// the row-space projection of the data; `row_sum` renormalizes by the
/// row sums of u_hat_m instead.
enum class ReconstructionScale { theta_hat, row_sum };

struct AugmentedOptions {
  ReconstructionScale scale = ReconstructionScale::theta_hat;
  double pinv_tol = -1.0;              // forwarded to pinv
  double fallback_condition = 1e12;    // trailing-block condition limit
};

/// Omega_hat = X V^T (V V^T)^+, so Omega_hat V is the orthogonal
/// projection of X onto the row space of V.
Matrix omega_hat(const Matrix& x, const Matrix& v, double tol = -1.0);

/// Row-wise scalar least squares: lambda_i = <omega_hat_i, xi_i> / |xi_i|^2.
Vector lambda_hat(const Matrix& xi, const Matrix& omega_hat);

/// Diagonal Theta_hat with entries lambda_i / psi_i.
Vector theta_hat(const Vector& psi, const Vector& lambda);

/// Solve Theta_hat (U^m)^T ~ Omega_hat by total least squares on the
/// SVD of the augmented matrix [Theta_hat Omega_hat]. Falls back to the
/// direct pseudo-inverse solve (flagged) when the trailing C x C block
/// is numerically singular.
std::pair<Matrix, TlsDiagnostics> tls_membership(const Vector& theta_hat,
                                                 const Matrix& omega_hat,
                                                 const AugmentedOptions& opts = {});

/// Full pipeline: memberships via the standard update, curvature
/// factors, omega_hat -> lambda_hat -> theta_hat -> TLS, and the final
/// reconstruction X_hat = Theta_hat (U_hat^m)^T V.
AugmentedModel augmented_reconstruct(const Matrix& x, const Matrix& v,
                                     double m, const NormalizationStats& stds,
                                     const AugmentedOptions& opts = {});

/// JSON round-trip for the CLI `reconstruct` subcommand.
std::string model_to_json(const AugmentedModel& model,
                          const NormalizationStats& stds);
std::pair<AugmentedModel, NormalizationStats> model_from_json(
    const std::string& text);

}  // namespace gran
