#include "gran/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace gran {

double reconstruction_error(const Matrix& x, const Matrix& x_hat,
                            const NormalizationStats& stds) {
  if (x.rows() != x_hat.rows() || x.cols() != x_hat.cols()) {
    throw ArgumentError("reconstruction_error: shape mismatch (" +
                        std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                        " vs " + std::to_string(x_hat.rows()) + "x" +
                        std::to_string(x_hat.cols()) + ")");
  }
  const Matrix diff =
      (x - x_hat).array().rowwise() / stds.stds.transpose().array();
  return diff.squaredNorm() / static_cast<double>(x.rows());
}

namespace {

double weighted_total(double train_err, Eigen::Index n_train, double test_err,
                      Eigen::Index n_test) {
  return (train_err * static_cast<double>(n_train) +
          test_err * static_cast<double>(n_test)) /
         static_cast<double>(n_train + n_test);
}

}  // namespace

GridCell run_fold(const Matrix& train, const Matrix& test, int c, double m,
                  const FcmSettings& settings, const NormalizationStats& stds,
                  std::uint64_t seed, bool run_baseline, bool run_augmented,
                  ReconstructionScale scale) {
  if (train.cols() != test.cols()) {
    throw ArgumentError("run_fold: train and test feature counts differ");
  }
  GridCell cell;
  cell.c = c;
  cell.m = m;
  try {
    FcmConfig cfg;
    cfg.c = c;
    cfg.m = m;
    cfg.epsilon = settings.epsilon;
    cfg.max_iter = settings.max_iter;
    cfg.restarts = settings.restarts;
    cfg.seed = seed;

    const FcmResult fit = fcm_fit(train, cfg, stds);
    cell.iterations = fit.iterations;
    cell.objective_trace = fit.objective_trace;

    if (run_baseline) {
      const Matrix xh_train = degranulate(fit.u, fit.v, m);
      cell.baseline.train = reconstruction_error(train, xh_train, stds);
      const Matrix u_test = membership_for(test, fit.v, m, stds);
      const Matrix xh_test = degranulate(u_test, fit.v, m);
      cell.baseline.test = reconstruction_error(test, xh_test, stds);
      cell.baseline.total = weighted_total(cell.baseline.train, train.rows(),
                                           cell.baseline.test, test.rows());
    }
    if (run_augmented) {
      AugmentedOptions opts;
      opts.scale = scale;
      const AugmentedModel mtr = augmented_reconstruct(train, fit.v, m, stds, opts);
      cell.augmented.train = reconstruction_error(train, mtr.x_hat, stds);
      // Held-out data go through the full pipeline with frozen prototypes.
      const AugmentedModel mte = augmented_reconstruct(test, fit.v, m, stds, opts);
      cell.augmented.test = reconstruction_error(test, mte.x_hat, stds);
      cell.augmented.total = weighted_total(cell.augmented.train, train.rows(),
                                            cell.augmented.test, test.rows());
      cell.tls_fallback = mtr.diagnostics.fallback || mte.diagnostics.fallback;
      cell.u_hat_min = mtr.diagnostics.u_hat_min;
      cell.u_hat_max = mtr.diagnostics.u_hat_max;
    }
    cell.ok = true;
  } catch (const Error& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

EvalReport grid_search(const RawDataset& dataset, const ExperimentConfig& cfg) {
  if (cfg.c_values.empty() || cfg.m_values.empty()) {
    throw ArgumentError("grid_search: empty (c, m) grid");
  }
  for (int c : cfg.c_values) {
    if (c < 1) throw ArgumentError("grid_search: cluster counts must be >= 1");
  }
  for (double m : cfg.m_values) {
    if (m <= 1.0) throw ArgumentError("grid_search: fuzziness must exceed 1");
  }
  if (cfg.folds < 2) throw ArgumentError("grid_search: need at least 2 folds");
  if (!cfg.run_baseline && !cfg.run_augmented) {
    throw ArgumentError("grid_search: no method selected");
  }

  const int n = static_cast<int>(dataset.features.rows());
  const int max_c = *std::max_element(cfg.c_values.begin(), cfg.c_values.end());
  const int min_train = n - (n + cfg.folds - 1) / cfg.folds;
  if (min_train < max_c) {
    throw ArgumentError("grid_search: training folds of " +
                        std::to_string(min_train) +
                        " points cannot hold " + std::to_string(max_c) +
                        " clusters");
  }
  if (cfg.stratified && !dataset.has_labels()) {
    throw ArgumentError("grid_search: stratified split needs labels");
  }

  EvalReport report;
  report.dataset = dataset.source;
  report.config = cfg;

  const FoldPlan plan =
      cfg.stratified ? stratified_kfold(dataset.labels, cfg.folds, cfg.seed)
                     : kfold_split(n, cfg.folds, cfg.seed);

  // Global normalization by default; the per-fold flag recomputes stats
  // on each training fold instead.
  Matrix global_features;
  if (!cfg.per_fold_normalization) {
    global_features = zscore(dataset).first.features;
  }
  const NormalizationStats unit = NormalizationStats::unit(dataset.features.cols());

  struct Task {
    int fold;
    std::size_t ci;
    std::size_t mi;
  };
  std::vector<Task> tasks;
  for (int fold = 0; fold < cfg.folds; ++fold) {
    for (std::size_t ci = 0; ci < cfg.c_values.size(); ++ci) {
      for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
        tasks.push_back({fold, ci, mi});
      }
    }
  }

  std::vector<GridCell> cells(tasks.size());
  auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    const auto train_idx = plan.train_indices(task.fold);
    const auto test_idx = plan.test_indices(task.fold);

    Matrix train, test;
    if (cfg.per_fold_normalization) {
      RawDataset train_raw;
      train_raw.features = take_rows(dataset.features, train_idx);
      auto [normed, stats] = zscore(train_raw);
      train = normed.features;
      test = (take_rows(dataset.features, test_idx).rowwise() -
              stats.means.transpose())
                 .array()
                 .rowwise() /
             stats.stds.transpose().array();
    } else {
      train = take_rows(global_features, train_idx);
      test = take_rows(global_features, test_idx);
    }

    const std::uint64_t cell_seed =
        mix_seed(cfg.seed, static_cast<std::uint64_t>(task.fold) * 1000003ULL +
                               task.ci * 1009ULL + task.mi);
    GridCell cell = run_fold(train, test, cfg.c_values[task.ci],
                             cfg.m_values[task.mi], cfg.fcm, unit, cell_seed,
                             cfg.run_baseline, cfg.run_augmented, cfg.scale);
    cell.fold = task.fold;
    cells[t] = std::move(cell);
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < tasks.size();
             t = next.fetch_add(1)) {
          run_task(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  // Deterministic reduction regardless of execution schedule.
  std::sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    if (a.fold != b.fold) return a.fold < b.fold;
    if (a.c != b.c) return a.c < b.c;
    return a.m < b.m;
  });
  report.cells = std::move(cells);

  const bool select_augmented = cfg.run_augmented;
  for (int fold = 0; fold < cfg.folds; ++fold) {
    FoldOutcome out;
    out.fold = fold;
    const GridCell* best = nullptr;
    double best_metric = 0;
    std::string first_error;
    for (const GridCell& cell : report.cells) {
      if (cell.fold != fold) continue;
      if (!cell.ok) {
        if (first_error.empty()) first_error = cell.error;
        continue;
      }
      const MethodErrors& sel = select_augmented ? cell.augmented : cell.baseline;
      const double metric = cfg.select_on == SelectOn::train ? sel.train : sel.total;
      if (!best || metric < best_metric) {
        best = &cell;
        best_metric = metric;
      }
    }
    if (best) {
      out.c = best->c;
      out.m = best->m;
      out.baseline = best->baseline;
      out.augmented = best->augmented;
      out.iterations = best->iterations;
      out.tls_fallback = best->tls_fallback;
      out.ok = true;
    } else {
      out.ok = false;
      out.error = first_error.empty() ? "no successful grid cell" : first_error;
    }
    report.folds.push_back(std::move(out));
  }

  report.summary = summarize(report);
  return report;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};  // sample std
}

}  // namespace

EvalSummary summarize(const EvalReport& report) {
  EvalSummary summary;
  std::vector<double> base_train, base_test, aug_train, aug_test;
  for (const FoldOutcome& fold : report.folds) {
    if (!fold.ok) continue;
    ++summary.successful_folds;
    if (report.config.run_baseline) {
      base_train.push_back(fold.baseline.train);
      base_test.push_back(fold.baseline.test);
    }
    if (report.config.run_augmented) {
      aug_train.push_back(fold.augmented.train);
      aug_test.push_back(fold.augmented.test);
    }
  }
  if (summary.successful_folds == 0) {
    throw ArgumentError("summarize: every fold failed");
  }
  if (!base_train.empty()) {
    MethodSummary s;
    std::tie(s.mean_train, s.std_train) = mean_std(base_train);
    std::tie(s.mean_test, s.std_test) = mean_std(base_test);
    summary.by_method["fcm"] = s;
  }
  if (!aug_train.empty()) {
    MethodSummary s;
    std::tie(s.mean_train, s.std_train) = mean_std(aug_train);
    std::tie(s.mean_test, s.std_test) = mean_std(aug_test);
    summary.by_method["augmented"] = s;
  }
  return summary;
}

namespace {

nlohmann::json errors_to_json(const MethodErrors& e) {
  return {{"train", e.train}, {"test", e.test}, {"total", e.total}};
}

MethodErrors errors_from_json(const nlohmann::json& j) {
  MethodErrors e;
  e.train = j.at("train").get<double>();
  e.test = j.at("test").get<double>();
  e.total = j.at("total").get<double>();
  return e;
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["dataset"] = report.dataset;
  const ExperimentConfig& cfg = report.config;
  j["config"] = {
      {"c_values", cfg.c_values},
      {"m_values", cfg.m_values},
      {"folds", cfg.folds},
      {"seed", cfg.seed},
      {"run_baseline", cfg.run_baseline},
      {"run_augmented", cfg.run_augmented},
      {"per_fold_normalization", cfg.per_fold_normalization},
      {"stratified", cfg.stratified},
      {"select_on", cfg.select_on == SelectOn::train ? "train" : "total"},
      {"epsilon", cfg.fcm.epsilon},
      {"max_iter", cfg.fcm.max_iter},
      {"restarts", cfg.fcm.restarts},
      {"scale", cfg.scale == ReconstructionScale::theta_hat ? "theta_hat" : "row_sum"},
  };
  j["cells"] = nlohmann::json::array();
  for (const GridCell& cell : report.cells) {
    j["cells"].push_back({{"fold", cell.fold},
                          {"c", cell.c},
                          {"m", cell.m},
                          {"fcm", errors_to_json(cell.baseline)},
                          {"augmented", errors_to_json(cell.augmented)},
                          {"iterations", cell.iterations},
                          {"tls_fallback", cell.tls_fallback},
                          {"ok", cell.ok},
                          {"error", cell.error}});
  }
  j["folds"] = nlohmann::json::array();
  for (const FoldOutcome& fold : report.folds) {
    j["folds"].push_back({{"fold", fold.fold},
                          {"c", fold.c},
                          {"m", fold.m},
                          {"fcm", errors_to_json(fold.baseline)},
                          {"augmented", errors_to_json(fold.augmented)},
                          {"iterations", fold.iterations},
                          {"tls_fallback", fold.tls_fallback},
                          {"ok", fold.ok},
                          {"error", fold.error}});
  }
  j["summary"]["successful_folds"] = report.summary.successful_folds;
  for (const auto& [name, s] : report.summary.by_method) {
    j["summary"][name] = {{"mean_train", s.mean_train},
                          {"std_train", s.std_train},
                          {"mean_test", s.mean_test},
                          {"std_test", s.std_test}};
  }
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("report JSON parse failed: ") + e.what());
  }
  try {
    EvalReport report;
    report.dataset = j.at("dataset").get<std::string>();
    const auto& cj = j.at("config");
    report.config.c_values = cj.at("c_values").get<std::vector<int>>();
    report.config.m_values = cj.at("m_values").get<std::vector<double>>();
    report.config.folds = cj.at("folds").get<int>();
    report.config.seed = cj.at("seed").get<std::uint64_t>();
    report.config.run_baseline = cj.at("run_baseline").get<bool>();
    report.config.run_augmented = cj.at("run_augmented").get<bool>();
    for (const auto& fj : j.at("folds")) {
      FoldOutcome fold;
      fold.fold = fj.at("fold").get<int>();
      fold.c = fj.at("c").get<int>();
      fold.m = fj.at("m").get<double>();
      fold.baseline = errors_from_json(fj.at("fcm"));
      fold.augmented = errors_from_json(fj.at("augmented"));
      fold.iterations = fj.at("iterations").get<int>();
      fold.tls_fallback = fj.at("tls_fallback").get<bool>();
      fold.ok = fj.at("ok").get<bool>();
      fold.error = fj.at("error").get<std::string>();
      report.folds.push_back(std::move(fold));
    }
    report.summary = summarize(report);
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("report JSON missing field: ") + e.what());
  }
}

std::string cells_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "fold,c,m,method,train,test,total,iterations,tls_fallback,ok\n";
  char buf[64];
  auto emit = [&](const GridCell& cell, const char* method,
                  const MethodErrors& e) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g", e.train, e.test,
                  e.total);
    out << cell.fold << ',' << cell.c << ',' << cell.m << ',' << method << ','
        << buf << ',' << cell.iterations << ',' << (cell.tls_fallback ? 1 : 0)
        << ',' << (cell.ok ? 1 : 0) << '\n';
  };
  for (const GridCell& cell : report.cells) {
    if (report.config.run_baseline) emit(cell, "fcm", cell.baseline);
    if (report.config.run_augmented) emit(cell, "augmented", cell.augmented);
  }
  return out.str();
}

std::string report_to_table(const EvalReport& report) {
  std::ostringstream out;
  char buf[512];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%8.4f", v);
    return std::string(buf);
  };

  out << "Dataset: " << report.dataset << "\n";
  out << std::left;
  auto row_header = [&](const std::string& name) {
    std::snprintf(buf, sizeof(buf), "%-18s", name.c_str());
    out << buf;
  };

  row_header("Fold");
  for (const FoldOutcome& fold : report.folds) {
    std::snprintf(buf, sizeof(buf), "%8s", ("P" + std::to_string(fold.fold + 1)).c_str());
    out << buf;
  }
  out << "\n";
  row_header("C");
  for (const FoldOutcome& fold : report.folds) {
    std::snprintf(buf, sizeof(buf), "%8d", fold.c);
    out << buf;
  }
  out << "\n";
  row_header("m");
  for (const FoldOutcome& fold : report.folds) out << num(fold.m);
  out << "\n";

  auto error_rows = [&](const std::string& split, auto get) {
    if (report.config.run_baseline) {
      row_header(split + " FCM");
      for (const FoldOutcome& fold : report.folds) out << num(get(fold.baseline));
      out << "\n";
    }
    if (report.config.run_augmented) {
      row_header(split + " Augmented");
      for (const FoldOutcome& fold : report.folds) out << num(get(fold.augmented));
      out << "\n";
    }
  };
  error_rows("Train", [](const MethodErrors& e) { return e.train; });
  error_rows("Test", [](const MethodErrors& e) { return e.test; });
  error_rows("Total", [](const MethodErrors& e) { return e.total; });

  out << "\nMean and standard deviation (" << report.summary.successful_folds
      << " successful folds)\n";
  std::snprintf(buf, sizeof(buf), "%-12s%14s%14s%14s%14s\n", "Method",
                "Train mean", "Train std", "Test mean", "Test std");
  out << buf;
  for (const auto& [name, s] : report.summary.by_method) {
    std::snprintf(buf, sizeof(buf), "%-12s%14.4f%14.4f%14.4f%14.4f\n",
                  name.c_str(), s.mean_train, s.std_train, s.mean_test,
                  s.std_test);
    out << buf;
  }
  return out.str();
}

}  // namespace gran
