// Acceptance suite: runs every acceptance criterion end to end and
// prints one PASS/FAIL line per criterion. Exit status is nonzero when
// any hard criterion fails; SOFT lines are informational.
//
// The three public benchmark datasets (vertebral column, glass
// identification, urban land cover) are read from $GRAN_DATA_DIR (or
// ./data) when present: <dir>/vertebral_column.csv etc., header row,
// class label in the last column. Without them, seeded synthetic
// stand-ins with the same shapes are used and the absolute error gates
// are reported as soft.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <sys/stat.h>
#include <thread>
#include <vector>

#include "gran/eval.hpp"

using namespace gran;

namespace {

int g_hard_failures = 0;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void report(int index, const std::string& name, bool pass, double seconds,
            double limit_seconds, const std::string& detail, bool hard = true) {
  const bool in_time = seconds < limit_seconds;
  const bool ok = pass && in_time;
  if (hard && !ok) ++g_hard_failures;
  std::printf("[%s] %d. %s (%.1fs/%.0fs) %s\n",
              ok ? "PASS" : (hard ? "FAIL" : "SOFT-MISS"), index, name.c_str(),
              seconds, limit_seconds, detail.c_str());
  std::fflush(stdout);
}

void report_soft(const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] soft gate: %s %s\n", pass ? "SOFT-PASS" : "SOFT-MISS",
              name.c_str(), detail.c_str());
  std::fflush(stdout);
}

Matrix seeded_random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

Matrix row_space_projection(const Matrix& x, const Matrix& v) {
  return x * v.transpose() * pinv(v * v.transpose()) * v;
}

bool file_exists(const std::string& path) {
  struct stat st{};
  return ::stat(path.c_str(), &st) == 0;
}

std::string data_dir() {
  const char* env = std::getenv("GRAN_DATA_DIR");
  return env ? env : "data";
}

// Class blobs living in a low-dimensional latent space, mixed up to the
// ambient dimension plus small isotropic noise. Mimics heavily
// correlated feature tables (the urban land cover case).
RawDataset correlated_blobs(int n_points, int dims, int latent_dims,
                            int n_classes, std::uint64_t seed, double noise) {
  RawDataset latent = synth_gaussian(n_points, latent_dims, n_classes, seed);
  const Matrix mixing = seeded_random(latent_dims, dims, mix_seed(seed, 1)) /
                        std::sqrt(static_cast<double>(latent_dims));
  RawDataset d;
  d.source = "correlated-blobs";
  d.features = latent.features * mixing +
               noise * seeded_random(n_points, dims, mix_seed(seed, 2));
  d.labels = latent.labels;
  return d;
}

int hardware_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 4 : static_cast<int>(hw);
}

struct BenchResult {
  EvalReport report;
  bool real_data = false;
};

BenchResult run_benchmark(const std::string& file_stub, int n, int dims,
                          int classes, int c, double m, std::uint64_t seed,
                          const RawDataset* stand_in = nullptr) {
  const std::string path = data_dir() + "/" + file_stub + ".csv";
  BenchResult out;
  RawDataset d;
  if (file_exists(path)) {
    d = load_csv(path, true, dims);  // label in the last column
    out.real_data = true;
  } else if (stand_in) {
    d = *stand_in;
  } else {
    d = synth_gaussian(n, dims, classes, seed);
  }
  ExperimentConfig cfg;
  cfg.c_values = {c};
  cfg.m_values = {m};
  cfg.folds = 10;
  cfg.seed = seed;
  cfg.workers = hardware_workers();
  out.report = grid_search(d, cfg);
  return out;
}

// Reports collected for the dominance/monotonicity sweep (criterion 8).
std::vector<EvalReport> g_collected;

void criterion_projection() {
  const double t0 = now_seconds();
  bool pass = true;
  std::string detail;
  int checked = 0;
  for (std::uint64_t trial = 0; checked < 50 && trial < 500 && pass; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(trial % 4);   // 3..6
    const Eigen::Index N = 40 + static_cast<Eigen::Index>(trial % 5) * 8;
    const int c = static_cast<int>(n) + 1 + static_cast<int>(trial % 3);
    const Matrix x = seeded_random(N, n, 1000 + trial);
    const NormalizationStats unit = NormalizationStats::unit(n);

    FcmConfig cfg;
    cfg.c = c;
    cfg.m = 1.2 + 0.1 * static_cast<double>(trial % 4);
    cfg.seed = trial;
    const FcmResult fit = fcm_fit(x, cfg, unit);
    // The exact-restoration guarantee is conditional on rank(V) = n; a
    // high fuzzifier can smear every prototype onto the global mean, so
    // skip draws whose prototype matrix is numerically rank-deficient.
    const Vector sv = svd(fit.v).singulars;
    if (sv.minCoeff() < 1e-6 * sv.maxCoeff()) continue;
    ++checked;

    const AugmentedModel model = augmented_reconstruct(x, fit.v, cfg.m, unit);
    const double err = reconstruction_error(x, model.x_hat, unit);
    const double proj_gap =
        (model.x_hat - row_space_projection(x, fit.v)).norm();
    if (err > 1e-6 || proj_gap > 1e-6 * x.norm()) {
      pass = false;
      detail = "trial " + std::to_string(trial) + ": error " +
               std::to_string(err) + ", projection gap " +
               std::to_string(proj_gap / x.norm());
    }
  }
  if (pass && checked < 50) {
    pass = false;
    detail = "only " + std::to_string(checked) + " full-rank draws in 500 seeds";
  }
  if (pass) detail = "50 random datasets, error <= 1e-6 and matches the projection";
  report(1, "projection theorem (rank(V) = n implies exact restoration)",
         pass, now_seconds() - t0, 30, detail);
}

void criterion_vertebral() {
  const double t0 = now_seconds();
  const BenchResult bench = run_benchmark("vertebral_column", 310, 6, 3, 8, 1.2, 101);
  g_collected.push_back(bench.report);
  const MethodSummary aug = bench.report.summary.by_method.at("augmented");
  const MethodSummary fcm = bench.report.summary.by_method.at("fcm");
  const bool pass = aug.mean_train <= 0.01 && aug.mean_test <= 0.01 &&
                    fcm.mean_train >= 5.0 * aug.mean_train;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s: fcm train %.4f test %.4f | augmented train %.6f test %.6f",
                bench.real_data ? "real data" : "synthetic stand-in",
                fcm.mean_train, fcm.mean_test, aug.mean_train, aug.mean_test);
  report(2, "vertebral column, c=8, m=1.2, 10-fold", pass, now_seconds() - t0,
         60, buf);
}

void criterion_glass() {
  const double t0 = now_seconds();
  const BenchResult bench = run_benchmark("glass_identification", 214, 9, 6, 12, 1.2, 102);
  g_collected.push_back(bench.report);
  const MethodSummary aug = bench.report.summary.by_method.at("augmented");
  const MethodSummary fcm = bench.report.summary.by_method.at("fcm");
  const bool pass = aug.mean_train <= 0.2 * fcm.mean_train;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s: fcm train %.4f | augmented train %.6f (ratio %.4f)",
                bench.real_data ? "real data" : "synthetic stand-in",
                fcm.mean_train, aug.mean_train, aug.mean_train / fcm.mean_train);
  report(3, "glass identification, c=12, m=1.2, 10-fold", pass,
         now_seconds() - t0, 60, buf);
  report_soft("glass FCM train mean in [0.06, 0.17]",
              fcm.mean_train >= 0.06 && fcm.mean_train <= 0.17,
              bench.real_data
                  ? ""
                  : "(absolute magnitudes are not comparable on the stand-in)");
}

void criterion_urban() {
  const double t0 = now_seconds();
  const RawDataset stand_in = correlated_blobs(675, 147, 20, 7, 103, 0.3);
  const BenchResult bench =
      run_benchmark("urban_land_cover", 675, 147, 7, 7, 1.2, 103, &stand_in);
  g_collected.push_back(bench.report);
  const MethodSummary aug = bench.report.summary.by_method.at("augmented");
  const MethodSummary fcm = bench.report.summary.by_method.at("fcm");
  const bool pass = aug.mean_train <= 0.85 * fcm.mean_train;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s: fcm train %.4f | augmented train %.4f (ratio %.4f)",
                bench.real_data ? "real data" : "correlated stand-in",
                fcm.mean_train, aug.mean_train, aug.mean_train / fcm.mean_train);
  report(4, "urban land cover, c=7, m=1.2, 10-fold", pass, now_seconds() - t0,
         600, buf);
}

void criterion_synthetic_grid() {
  const double t0 = now_seconds();
  const RawDataset d = synth_gaussian(300, 6, 3, 105);
  ExperimentConfig cfg;
  cfg.c_values = {3, 4, 5, 6, 7, 8};
  for (int i = 0; i <= 9; ++i) cfg.m_values.push_back(1.2 + 0.2 * i);
  cfg.folds = 10;
  cfg.seed = 105;
  cfg.workers = hardware_workers();
  const EvalReport rep = grid_search(d, cfg);
  g_collected.push_back(rep);
  const MethodSummary aug = rep.summary.by_method.at("augmented");
  const MethodSummary fcm = rep.summary.by_method.at("fcm");
  const bool pass = aug.mean_train <= 1e-3 && aug.mean_test <= 1e-3 &&
                    fcm.mean_train > 0.01 && fcm.mean_test > 0.01;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "fcm train %.4f test %.4f | augmented train %.2e test %.2e",
                fcm.mean_train, fcm.mean_test, aug.mean_train, aug.mean_test);
  report(5, "synthetic 6-D, 300 points, full (c, m) grid, 10-fold", pass,
         now_seconds() - t0, 120, buf);
}

void criterion_factorization() {
  const double t0 = now_seconds();
  bool pass = true;
  std::string detail;
  const double m_values[] = {1.2, 2.0, 3.0};
  for (int trial = 0; trial < 100 && pass; ++trial) {
    const double m = m_values[trial % 3];
    const Eigen::Index n = 3 + trial % 3;
    const Matrix x = seeded_random(30, n, 2000 + static_cast<std::uint64_t>(trial));
    const NormalizationStats unit = NormalizationStats::unit(n);
    FcmConfig cfg;
    cfg.c = 3 + trial % 3;
    cfg.m = m;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const FcmResult fit = fcm_fit(x, cfg, unit);

    const DegranulationModel dm = degranulation_model(x, fit.u, fit.v, m, unit);
    const Matrix um_t = fit.u.array().pow(m).transpose();
    const double rel = (((dm.psi.asDiagonal() * dm.xi) - um_t).cwiseAbs().array() /
                        (um_t.cwiseAbs().array() + 1e-300)).maxCoeff();
    if (rel >= 1e-9) {
      pass = false;
      detail = "curvature identity off by " + std::to_string(rel);
      break;
    }

    // Pointwise prototype oracle.
    const Matrix v_matrix = granulate(x, fit.u, m);
    for (Eigen::Index j = 0; j < fit.u.rows(); ++j) {
      Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(n);
      double den = 0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double w = std::pow(fit.u(j, i), m);
        num += w * x.row(i);
        den += w;
      }
      if ((v_matrix.row(j) - num / den).cwiseAbs().maxCoeff() >= 1e-10) {
        pass = false;
        detail = "granulate disagrees with the pointwise prototype formula";
      }
    }

    // Pointwise reconstruction oracle.
    const Matrix xh = degranulate(fit.u, fit.v, m);
    for (Eigen::Index i = 0; i < x.rows() && pass; ++i) {
      Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(n);
      double den = 0;
      for (Eigen::Index j = 0; j < fit.u.rows(); ++j) {
        const double w = std::pow(fit.u(j, i), m);
        num += w * fit.v.row(j);
        den += w;
      }
      if ((xh.row(i) - num / den).cwiseAbs().maxCoeff() >= 1e-10) {
        pass = false;
        detail = "degranulate disagrees with the pointwise reconstruction";
      }
    }
  }
  if (pass) detail = "100 fitted models, m in {1.2, 2, 3}";
  report(6, "curvature factorization and pointwise equivalences", pass,
         now_seconds() - t0, 60, detail);
}

void criterion_tls() {
  const double t0 = now_seconds();
  bool pass = true;
  std::string detail;

  for (std::uint64_t trial = 0; trial < 100 && pass; ++trial) {
    const Eigen::Index N = 8 + static_cast<Eigen::Index>(trial % 8);
    const Eigen::Index C = 2 + static_cast<Eigen::Index>(trial % 3);
    std::mt19937_64 rng(3000 + trial);
    std::uniform_real_distribution<double> uni(0.5, 2.0);
    Vector theta(N);
    for (Eigen::Index i = 0; i < N; ++i) theta(i) = uni(rng);
    const Matrix omega = seeded_random(N, C, 4000 + trial);

    auto [u_hat, diag] = tls_membership(theta, omega);
    if (diag.fallback) continue;
    const Matrix direct = (theta.cwiseInverse().asDiagonal() * omega).transpose();
    if ((u_hat - direct).norm() >= 1e-6 * direct.norm()) {
      pass = false;
      detail = "TLS result diverges from the direct solve at trial " +
               std::to_string(trial);
    }
    Matrix augmented(N, N + C);
    augmented.leftCols(N) = Matrix(theta.asDiagonal());
    augmented.rightCols(C) = omega;
    const double smax = svd(augmented).singulars(0);
    if (diag.trailing_singulars.maxCoeff() >= 1e-10 * smax) {
      pass = false;
      detail = "trailing singular values are not negligible";
    }
  }

  // Brute-force scan oracle for the row-wise scale factors, 100 rows.
  const Matrix xi = seeded_random(100, 4, 5000);
  const Matrix oh = seeded_random(100, 4, 5001);
  const Vector lambda = lambda_hat(xi, oh);
  for (Eigen::Index i = 0; i < 100 && pass; ++i) {
    double best = 0, best_cost = 1e300;
    for (double l = -10.0; l <= 10.0; l += 1e-4) {
      const double c = (l * xi.row(i) - oh.row(i)).squaredNorm();
      if (c < best_cost) { best_cost = c; best = l; }
    }
    if (std::abs(lambda(i) - best) >= 1e-3) {
      pass = false;
      detail = "lambda scan mismatch at row " + std::to_string(i);
    }
  }
  if (pass) detail = "100 TLS instances and 100 scanned scale factors";
  report(7, "total least squares against direct-solve and scan oracles", pass,
         now_seconds() - t0, 60, detail);
}

void criterion_dominance() {
  const double t0 = now_seconds();
  bool pass = true;
  std::string detail;
  long cells = 0;
  for (const EvalReport& rep : g_collected) {
    for (const GridCell& cell : rep.cells) {
      if (!cell.ok) continue;
      ++cells;
      if (cell.augmented.train > cell.baseline.train + 1e-9) {
        pass = false;
        detail = "augmented worse than baseline at fold " +
                 std::to_string(cell.fold) + ", c=" + std::to_string(cell.c);
      }
      for (std::size_t t = 1; t < cell.objective_trace.size(); ++t) {
        if (cell.objective_trace[t] >
            cell.objective_trace[t - 1] * (1 + 1e-12) + 1e-12) {
          pass = false;
          detail = "objective increased during a sweep";
        }
      }
    }
  }
  if (pass) detail = std::to_string(cells) + " benchmark cells checked";
  report(8, "dominance and objective monotonicity over all benchmark cells",
         pass, now_seconds() - t0, 60, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite (%d workers)\n", hardware_workers());
  criterion_projection();
  criterion_vertebral();
  criterion_glass();
  criterion_urban();
  criterion_synthetic_grid();
  criterion_factorization();
  criterion_tls();
  criterion_dominance();
  if (g_hard_failures > 0) {
    std::printf("%d hard criterion(s) failed\n", g_hard_failures);
    return 1;
  }
  std::printf("all hard criteria passed\n");
  return 0;
}
