#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "gran/augmented.hpp"
#include "gran/data.hpp"
#include "gran/fcm.hpp"

namespace gran {

struct FcmSettings {
  double epsilon = 1e-5;
  int max_iter = 200;
  int restarts = 1;
};

/// Which per-fold error drives the (c, m) cell selection.
enum class SelectOn { train, total };

struct ExperimentConfig {
  std::vector<int> c_values;
  std::vector<double> m_values;
  int folds = 10;
  std::uint64_t seed = 0;
  bool run_baseline = true;
  bool run_augmented = true;
  bool per_fold_normalization = false;  // default: one global z-score
  bool stratified = false;
  SelectOn select_on = SelectOn::train;
  FcmSettings fcm;
  int workers = 1;
  ReconstructionScale scale = ReconstructionScale::theta_hat;
};

struct MethodErrors {
  double train = std::numeric_limits<double>::quiet_NaN();
  double test = std::numeric_limits<double>::quiet_NaN();
  double total = std::numeric_limits<double>::quiet_NaN();
};

/// One evaluated (fold, c, m) cell.
struct GridCell {
  int fold = 0;
  int c = 0;
  double m = 0.0;
  MethodErrors baseline;
  MethodErrors augmented;
  int iterations = 0;
  bool tls_fallback = false;
  double u_hat_min = 0.0;
  double u_hat_max = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> objective_trace;
};

/// The winning cell of one fold.
struct FoldOutcome {
  int fold = 0;
  int c = 0;
  double m = 0.0;
  MethodErrors baseline;
  MethodErrors augmented;
  int iterations = 0;
  bool tls_fallback = false;
  bool ok = false;
  std::string error;
};

struct MethodSummary {
  double mean_train = 0, std_train = 0;
  double mean_test = 0, std_test = 0;
};

struct EvalSummary {
  int successful_folds = 0;
  std::map<std::string, MethodSummary> by_method;  // "fcm", "augmented"
};

struct EvalReport {
  std::string dataset;
  ExperimentConfig config;
  std::vector<GridCell> cells;      // every evaluated cell, sorted (fold, c, m)
  std::vector<FoldOutcome> folds;   // one winner per fold
  EvalSummary summary;
};

/// Mean weighted squared reconstruction distance, (1/N) sum_i d2(x_i, x_hat_i).
double reconstruction_error(const Matrix& x, const Matrix& x_hat,
                            const NormalizationStats& stds);

/// Fit FCM on train and evaluate baseline / augmented reconstruction
/// errors on train, test, and their union (size-weighted mean).
GridCell run_fold(const Matrix& train, const Matrix& test, int c, double m,
                  const FcmSettings& settings, const NormalizationStats& stds,
                  std::uint64_t seed, bool run_baseline = true,
                  bool run_augmented = true,
                  ReconstructionScale scale = ReconstructionScale::theta_hat);

/// Full protocol: z-score, k-fold split, evaluate every (fold, c, m)
/// cell (optionally on a bounded worker pool), select each fold's best
/// cell by the configured criterion, summarize. Deterministic given cfg,
/// independent of worker count.
EvalReport grid_search(const RawDataset& dataset, const ExperimentConfig& cfg);

/// Recompute per-method mean and sample (k-1) standard deviation from
/// the fold list. Throws ArgumentError when no fold succeeded.
EvalSummary summarize(const EvalReport& report);

/// Renderers for the three report surfaces.
std::string report_to_json(const EvalReport& report);
std::string report_to_table(const EvalReport& report);
std::string cells_to_csv(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

}  // namespace gran
