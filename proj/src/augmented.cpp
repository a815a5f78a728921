#include "gran/augmented.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

namespace gran {

Matrix omega_hat(const Matrix& x, const Matrix& v, double tol) {
  if (x.cols() != v.cols()) {
    throw DimensionError("omega_hat: X has " + std::to_string(x.cols()) +
                         " features but V has " + std::to_string(v.cols()));
  }
  const Matrix gram = v * v.transpose();  // C x C, rank <= n
  if (tol < 0) {
    tol = static_cast<double>(std::max(gram.rows(), gram.cols())) * 1e-12;
  }
  // Prototypes are weighted means of the data, so singular directions of
  // the gram far below the data's mean squared row norm are rounding
  // noise (a single centered prototype, for instance), not row space.
  const SvdFactors f = svd(gram);
  const double scale =
      std::max(f.singulars.size() ? f.singulars(0) : 0.0,
               x.squaredNorm() / static_cast<double>(x.rows()));
  const double cutoff = tol * scale;
  Vector inv = Vector::Zero(f.singulars.size());
  for (Eigen::Index i = 0; i < f.singulars.size(); ++i) {
    if (f.singulars(i) > cutoff) inv(i) = 1.0 / f.singulars(i);
  }
  const Matrix gram_pinv = f.right * inv.asDiagonal() * f.left.transpose();
  return x * v.transpose() * gram_pinv;
}

Vector lambda_hat(const Matrix& xi, const Matrix& omega_hat) {
  if (xi.rows() != omega_hat.rows() || xi.cols() != omega_hat.cols()) {
    throw DimensionError("lambda_hat: xi and omega_hat shapes differ");
  }
  Vector lambda(xi.rows());
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    const double denom = xi.row(i).squaredNorm();
    if (denom <= 0) {
      throw ArgumentError("lambda_hat: zero-norm curvature row " +
                          std::to_string(i));
    }
    lambda(i) = omega_hat.row(i).dot(xi.row(i)) / denom;
  }
  return lambda;
}

Vector theta_hat(const Vector& psi, const Vector& lambda) {
  if (psi.size() != lambda.size()) {
    throw DimensionError("theta_hat: psi and lambda lengths differ");
  }
  Vector theta(psi.size());
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (std::abs(psi(i)) < 1e-300) {
      throw ArgumentError("theta_hat: psi underflow at datum " +
                          std::to_string(i));
    }
    theta(i) = lambda(i) / psi(i);
  }
  return theta;
}

std::pair<Matrix, TlsDiagnostics> tls_membership(const Vector& theta,
                                                 const Matrix& omega,
                                                 const AugmentedOptions& opts) {
  const Eigen::Index N = theta.size();
  const Eigen::Index C = omega.cols();
  if (omega.rows() != N) {
    throw DimensionError("tls_membership: omega_hat has " +
                         std::to_string(omega.rows()) + " rows, expected " +
                         std::to_string(N));
  }

  Matrix augmented(N, N + C);
  augmented.leftCols(N) = Matrix(theta.asDiagonal());
  augmented.rightCols(C) = omega;

  const SvdFactors f = svd(augmented);
  TlsDiagnostics diag;
  // Singular values of the trailing C right-singular columns. The matrix
  // has N + C columns but at most N nonzero singular values, so the
  // spectrum is extended with exact zeros before taking the tail.
  Vector extended = Vector::Zero(N + C);
  extended.head(f.singulars.size()) = f.singulars;
  diag.trailing_singulars = extended.tail(C);

  // Trailing C right-singular columns span the (near-)null space.
  const Matrix g_trail = f.right.rightCols(C);
  const Matrix g1 = g_trail.topRows(N);     // N x C
  const Matrix g2 = g_trail.bottomRows(C);  // C x C
  diag.g2_condition = condition_estimate(g2);

  Matrix u_hat;
  if (diag.g2_condition > opts.fallback_condition ||
      !std::isfinite(diag.g2_condition)) {
    diag.fallback = true;
    // Direct solve against the same target: Theta^+ Omega.
    Vector theta_inv = Vector::Zero(N);
    const double cutoff = theta.cwiseAbs().maxCoeff() * 1e-14;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (std::abs(theta(i)) > cutoff) theta_inv(i) = 1.0 / theta(i);
    }
    u_hat = (theta_inv.asDiagonal() * omega).transpose();
  } else {
    u_hat = (-g1 * pinv(g2)).transpose();
  }
  diag.u_hat_min = u_hat.minCoeff();
  diag.u_hat_max = u_hat.maxCoeff();
  return {std::move(u_hat), std::move(diag)};
}

AugmentedModel augmented_reconstruct(const Matrix& x, const Matrix& v,
                                     double m, const NormalizationStats& stds,
                                     const AugmentedOptions& opts) {
  AugmentedModel model;
  model.m = m;
  model.prototypes = v;

  const Matrix u = membership_for(x, v, m, stds);
  const DegranulationModel dm = degranulation_model(x, u, v, m, stds);

  model.omega_hat = omega_hat(x, v, opts.pinv_tol);
  model.lambda_hat = lambda_hat(dm.xi, model.omega_hat);
  model.theta_hat = theta_hat(dm.psi, model.lambda_hat);

  auto [u_hat, diag] = tls_membership(model.theta_hat, model.omega_hat, opts);
  model.u_hat_m = std::move(u_hat);
  model.diagnostics = std::move(diag);

  if (opts.scale == ReconstructionScale::theta_hat) {
    model.x_hat = model.theta_hat.asDiagonal() *
                  (model.u_hat_m.transpose() * v);
  } else {
    // Row-sum renormalization; not the default composition.
    const Vector sums = model.u_hat_m.colwise().sum();
    Vector inv = Vector::Zero(sums.size());
    for (Eigen::Index i = 0; i < sums.size(); ++i) {
      if (std::abs(sums(i)) > 1e-300) inv(i) = 1.0 / sums(i);
    }
    model.x_hat = inv.asDiagonal() * (model.u_hat_m.transpose() * v);
  }
  return model;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ArgumentError("model JSON: bad matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(i)].size()) != cols) {
      throw ArgumentError("model JSON: ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const AugmentedModel& model,
                          const NormalizationStats& stds) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["m"] = model.m;
  j["prototypes"] = matrix_to_json(model.prototypes);
  j["theta_hat"] = vector_to_json(model.theta_hat);
  j["u_hat_m"] = matrix_to_json(model.u_hat_m);
  j["normalization"]["means"] = vector_to_json(stds.means);
  j["normalization"]["stds"] = vector_to_json(stds.stds);
  j["diagnostics"]["trailing_singulars"] =
      vector_to_json(model.diagnostics.trailing_singulars);
  j["diagnostics"]["g2_condition"] = model.diagnostics.g2_condition;
  j["diagnostics"]["u_hat_min"] = model.diagnostics.u_hat_min;
  j["diagnostics"]["u_hat_max"] = model.diagnostics.u_hat_max;
  j["diagnostics"]["fallback"] = model.diagnostics.fallback;
  return j.dump(2);
}

std::pair<AugmentedModel, NormalizationStats> model_from_json(
    const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("model JSON parse failed: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != 1) {
      throw ArgumentError("unsupported model schema version");
    }
    AugmentedModel model;
    model.m = j.at("m").get<double>();
    model.prototypes = matrix_from_json(j.at("prototypes"));
    model.theta_hat = vector_from_json(j.at("theta_hat"));
    model.u_hat_m = matrix_from_json(j.at("u_hat_m"));
    model.x_hat = model.theta_hat.asDiagonal() *
                  (model.u_hat_m.transpose() * model.prototypes);
    const auto& diag = j.at("diagnostics");
    model.diagnostics.trailing_singulars =
        vector_from_json(diag.at("trailing_singulars"));
    model.diagnostics.g2_condition = diag.at("g2_condition").get<double>();
    model.diagnostics.u_hat_min = diag.at("u_hat_min").get<double>();
    model.diagnostics.u_hat_max = diag.at("u_hat_max").get<double>();
    model.diagnostics.fallback = diag.at("fallback").get<bool>();
    NormalizationStats stds;
    stds.means = vector_from_json(j.at("normalization").at("means"));
    stds.stds = vector_from_json(j.at("normalization").at("stds"));
    return {std::move(model), std::move(stds)};
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("model JSON missing field: ") + e.what());
  }
}

}  // namespace gran
