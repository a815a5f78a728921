#include "gran/fcm.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace gran {

double distance2(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& v,
                 const NormalizationStats& stds) {
  if (x.size() != v.size() || x.size() != stds.stds.size()) {
    throw ArgumentError("distance2: length mismatch (" +
                        std::to_string(x.size()) + ", " +
                        std::to_string(v.size()) + ", " +
                        std::to_string(stds.stds.size()) + ")");
  }
  return ((x - v).array() / stds.stds.transpose().array()).square().sum();
}

Matrix pairwise_distance2(const Matrix& x, const Matrix& v,
                          const NormalizationStats& stds) {
  if (x.cols() != v.cols() || x.cols() != stds.stds.size()) {
    throw ArgumentError("pairwise_distance2: feature count mismatch");
  }
  const Matrix xs = x.array().rowwise() / stds.stds.transpose().array();
  const Matrix vs = v.array().rowwise() / stds.stds.transpose().array();
  Matrix d2(x.rows(), v.rows());
  for (Eigen::Index j = 0; j < v.rows(); ++j) {
    d2.col(j) = (xs.rowwise() - vs.row(j)).rowwise().squaredNorm();
  }
  // Tiny negative values can appear from cancellation.
  return d2.cwiseMax(0.0);
}

Matrix update_partition(const Matrix& x, const Matrix& v, double m,
                        const NormalizationStats& stds) {
  if (m <= 1.0) throw ArgumentError("fuzziness m must exceed 1");
  const Matrix d2 = pairwise_distance2(x, v, stds);
  const Eigen::Index N = x.rows();
  const Eigen::Index C = v.rows();
  const double expo = 1.0 / (m - 1.0);

  Matrix u(C, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    Eigen::Index argmin = 0;
    double dmin = d2(i, 0);
    for (Eigen::Index j = 1; j < C; ++j) {
      if (d2(i, j) < dmin) { dmin = d2(i, j); argmin = j; }
    }
    if (dmin == 0.0) {
      u.col(i).setZero();
      u(argmin, i) = 1.0;
      continue;
    }
    // Normalize by the smallest distance so the powers stay bounded.
    double total = 0.0;
    for (Eigen::Index j = 0; j < C; ++j) {
      const double w = std::pow(dmin / d2(i, j), expo);
      u(j, i) = w;
      total += w;
    }
    u.col(i) /= total;
  }
  return u;
}

Matrix update_prototypes(const Matrix& x, const Matrix& u, double m) {
  if (u.cols() != x.rows()) {
    throw DimensionError("update_prototypes: U is " + std::to_string(u.rows()) +
                         "x" + std::to_string(u.cols()) + " but X has " +
                         std::to_string(x.rows()) + " rows");
  }
  const Matrix um = u.array().pow(m);
  const Vector weight = um.rowwise().sum();
  for (Eigen::Index j = 0; j < u.rows(); ++j) {
    if (weight(j) < 1e-15) {
      throw DegenerateClusterError(
          "cluster " + std::to_string(j) + " has zero membership weight",
          static_cast<int>(j));
    }
  }
  return weight.cwiseInverse().asDiagonal() * (um * x);
}

double fcm_objective(const Matrix& x, const Matrix& u, const Matrix& v,
                     double m, const NormalizationStats& stds) {
  const Matrix d2 = pairwise_distance2(x, v, stds);  // N x C
  return (u.array().pow(m) * d2.transpose().array()).sum();
}

namespace {

Matrix random_partition(Eigen::Index c, Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Matrix u(c, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < c; ++j) {
      u(j, i) = uni(rng) + 1e-12;
      total += u(j, i);
    }
    u.col(i) /= total;
  }
  return u;
}

FcmResult fit_once(const Matrix& x, const FcmConfig& cfg,
                   const NormalizationStats& stds, std::uint64_t seed) {
  FcmResult res;
  Matrix u = random_partition(cfg.c, x.rows(), seed);
  for (int it = 0; it < cfg.max_iter; ++it) {
    res.v = update_prototypes(x, u, cfg.m);
    Matrix u_next = update_partition(x, res.v, cfg.m, stds);
    const double delta = (u_next - u).cwiseAbs().maxCoeff();
    u = std::move(u_next);
    res.objective_trace.push_back(fcm_objective(x, u, res.v, cfg.m, stds));
    res.iterations = it + 1;
    if (delta <= cfg.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.u = std::move(u);
  return res;
}

}  // namespace

FcmResult fcm_fit(const Matrix& x, const FcmConfig& cfg,
                  const NormalizationStats& stds) {
  if (cfg.m <= 1.0) throw ArgumentError("fuzziness m must exceed 1");
  if (cfg.c < 1) throw ArgumentError("cluster count must be >= 1");
  if (cfg.epsilon <= 0) throw ArgumentError("epsilon must be positive");
  if (cfg.max_iter < 1) throw ArgumentError("max_iter must be >= 1");
  if (cfg.restarts < 1) throw ArgumentError("restarts must be >= 1");
  if (x.rows() < cfg.c) {
    throw ArgumentError("need at least as many data as clusters");
  }
  require_finite(x, "fcm data");

  FcmResult best;
  bool have_best = false;
  std::exception_ptr last_error;
  for (int r = 0; r < cfg.restarts; ++r) {
    try {
      FcmResult run = fit_once(x, cfg, stds, mix_seed(cfg.seed, static_cast<std::uint64_t>(r)));
      if (!have_best ||
          run.objective_trace.back() < best.objective_trace.back()) {
        best = std::move(run);
        have_best = true;
      }
    } catch (const DegenerateClusterError&) {
      last_error = std::current_exception();
    }
  }
  if (!have_best) std::rethrow_exception(last_error);
  return best;
}

Matrix membership_for(const Matrix& x_new, const Matrix& v, double m,
                      const NormalizationStats& stds) {
  return update_partition(x_new, v, m, stds);
}

}  // namespace gran
