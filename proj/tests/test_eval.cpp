#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gran/eval.hpp"

using namespace gran;

namespace {

Matrix seeded_random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.c_values = {3};
  cfg.m_values = {2.0};
  cfg.folds = 3;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("reconstruction_error basics") {
  const NormalizationStats unit = NormalizationStats::unit(2);
  const Matrix x = seeded_random(6, 2, 1);
  CHECK(reconstruction_error(x, x, unit) == 0.0);

  Matrix a(1, 2), b(1, 2);
  a << 0, 0;
  b << 3, 4;
  CHECK(reconstruction_error(a, b, unit) == doctest::Approx(25.0));

  // Two points with squared distances 2 and 4: mean 3.
  Matrix x2(2, 1), y2(2, 1);
  x2 << 0, 0;
  y2 << std::sqrt(2.0), 2.0;
  CHECK(reconstruction_error(x2, y2, unit) == doctest::Approx(3.0));

  CHECK_THROWS_AS(reconstruction_error(x, a, unit), ArgumentError);
}

TEST_CASE("run_fold: identical train and test gives identical errors") {
  const Matrix x = seeded_random(30, 3, 2);
  const NormalizationStats unit = NormalizationStats::unit(3);
  const GridCell cell = run_fold(x, x, 3, 2.0, {}, unit, 7);
  REQUIRE(cell.ok);
  CHECK(cell.baseline.train == doctest::Approx(cell.baseline.test).epsilon(1e-10));
  CHECK(cell.augmented.train == doctest::Approx(cell.augmented.test).epsilon(1e-10));
}

TEST_CASE("run_fold: projection identity drives augmented errors to zero when c >= n") {
  const Matrix train = seeded_random(40, 3, 3);
  const Matrix test = seeded_random(12, 3, 4);
  const GridCell cell =
      run_fold(train, test, 5, 1.4, {}, NormalizationStats::unit(3), 8);
  REQUIRE(cell.ok);
  CHECK(cell.augmented.train <= 1e-6);
  CHECK(cell.augmented.test <= 1e-6);
}

TEST_CASE("run_fold total is the size-weighted mean") {
  const Matrix train = seeded_random(30, 4, 5);
  const Matrix test = seeded_random(10, 4, 6);
  const GridCell cell =
      run_fold(train, test, 3, 2.0, {}, NormalizationStats::unit(4), 9);
  REQUIRE(cell.ok);
  const double expect =
      (30.0 * cell.baseline.train + 10.0 * cell.baseline.test) / 40.0;
  CHECK(cell.baseline.total == doctest::Approx(expect).epsilon(1e-12));
  CHECK(cell.baseline.total >=
        std::min(cell.baseline.train, cell.baseline.test) - 1e-15);
  CHECK(cell.baseline.total <=
        std::max(cell.baseline.train, cell.baseline.test) + 1e-15);
}

TEST_CASE("grid_search single cell reduces to per-fold runs and is deterministic") {
  const RawDataset d = synth_gaussian(60, 3, 3, 10);
  ExperimentConfig cfg = small_config();
  const EvalReport a = grid_search(d, cfg);
  const EvalReport b = grid_search(d, cfg);
  CHECK(a.folds.size() == 3);
  CHECK(a.cells.size() == 3);
  CHECK(report_to_json(a) == report_to_json(b));
  for (const FoldOutcome& fold : a.folds) {
    CHECK(fold.ok);
    CHECK(fold.c == 3);
    CHECK(fold.m == 2.0);
  }
}

TEST_CASE("grid_search is schedule independent") {
  const RawDataset d = synth_gaussian(80, 4, 2, 11);
  ExperimentConfig cfg;
  cfg.c_values = {2, 3};
  cfg.m_values = {1.5, 2.5};
  cfg.folds = 4;
  cfg.seed = 12;
  cfg.workers = 1;
  const EvalReport sequential = grid_search(d, cfg);
  cfg.workers = 8;
  const EvalReport parallel = grid_search(d, cfg);
  CHECK(report_to_json(sequential) == report_to_json(parallel));
  CHECK(cells_to_csv(sequential) == cells_to_csv(parallel));
}

TEST_CASE("grid_search dominance: augmented never worse than baseline per cell") {
  const RawDataset d = synth_gaussian(70, 5, 2, 13);
  ExperimentConfig cfg;
  cfg.c_values = {2, 4};
  cfg.m_values = {1.2, 2.0};
  cfg.folds = 2;
  cfg.seed = 14;
  const EvalReport report = grid_search(d, cfg);
  for (const GridCell& cell : report.cells) {
    REQUIRE(cell.ok);
    CHECK(cell.augmented.train <= cell.baseline.train + 1e-9);
  }
}

TEST_CASE("grid_search rejects infeasible configurations") {
  const RawDataset d = synth_gaussian(20, 2, 2, 15);
  ExperimentConfig cfg = small_config();
  cfg.c_values = {19};  // larger than any training fold
  CHECK_THROWS_AS(grid_search(d, cfg), ArgumentError);
  cfg = small_config();
  cfg.c_values = {};
  CHECK_THROWS_AS(grid_search(d, cfg), ArgumentError);
  cfg = small_config();
  cfg.m_values = {1.0};
  CHECK_THROWS_AS(grid_search(d, cfg), ArgumentError);
}

TEST_CASE("summarize: constant folds give zero deviation") {
  EvalReport report;
  report.config.run_baseline = true;
  report.config.run_augmented = false;
  for (int f = 0; f < 3; ++f) {
    FoldOutcome fold;
    fold.fold = f;
    fold.ok = true;
    fold.baseline.train = 0.5;
    fold.baseline.test = 0.5;
    report.folds.push_back(fold);
  }
  const EvalSummary s = summarize(report);
  CHECK(s.by_method.at("fcm").mean_train == doctest::Approx(0.5));
  CHECK(s.by_method.at("fcm").std_train == doctest::Approx(0.0));
}

TEST_CASE("summarize matches the sample standard deviation convention") {
  // Published per-fold train errors for the glass benchmark round to
  // mean 0.111, std 0.003 under the (k-1) convention.
  const std::vector<double> glass = {0.115, 0.114, 0.110, 0.108, 0.111,
                                     0.113, 0.112, 0.107, 0.108, 0.111};
  EvalReport report;
  report.config.run_baseline = true;
  report.config.run_augmented = false;
  for (std::size_t f = 0; f < glass.size(); ++f) {
    FoldOutcome fold;
    fold.fold = static_cast<int>(f);
    fold.ok = true;
    fold.baseline.train = glass[f];
    fold.baseline.test = glass[f];
    report.folds.push_back(fold);
  }
  const EvalSummary s = summarize(report);
  CHECK(std::abs(s.by_method.at("fcm").mean_train - 0.111) < 5e-4);
  CHECK(std::abs(s.by_method.at("fcm").std_train - 0.003) < 5e-4);

  // Two folds (0.1, 0.3): mean 0.2, sample std ~0.1414.
  EvalReport two;
  two.config.run_baseline = true;
  two.config.run_augmented = false;
  for (int f = 0; f < 2; ++f) {
    FoldOutcome fold;
    fold.fold = f;
    fold.ok = true;
    fold.baseline.train = f == 0 ? 0.1 : 0.3;
    fold.baseline.test = fold.baseline.train;
    two.folds.push_back(fold);
  }
  const EvalSummary s2 = summarize(two);
  CHECK(s2.by_method.at("fcm").mean_train == doctest::Approx(0.2));
  CHECK(s2.by_method.at("fcm").std_train == doctest::Approx(0.1414).epsilon(1e-3));
}

TEST_CASE("summarize rejects an all-failed report") {
  EvalReport report;
  FoldOutcome fold;
  fold.ok = false;
  report.folds.push_back(fold);
  CHECK_THROWS_AS(summarize(report), ArgumentError);
}

TEST_CASE("summary is recomputable from the fold list") {
  const RawDataset d = synth_gaussian(50, 3, 2, 16);
  ExperimentConfig cfg = small_config();
  cfg.c_values = {2};
  const EvalReport report = grid_search(d, cfg);
  const EvalSummary redo = summarize(report);
  for (const auto& [name, s] : report.summary.by_method) {
    CHECK(s.mean_train == doctest::Approx(redo.by_method.at(name).mean_train).epsilon(1e-12));
    CHECK(s.std_test == doctest::Approx(redo.by_method.at(name).std_test).epsilon(1e-12));
  }
}

TEST_CASE("report JSON and table render") {
  const RawDataset d = synth_gaussian(50, 3, 2, 17);
  ExperimentConfig cfg = small_config();
  cfg.c_values = {2};
  const EvalReport report = grid_search(d, cfg);

  const std::string json = report_to_json(report);
  const EvalReport back = report_from_json(json);
  CHECK(back.folds.size() == report.folds.size());
  CHECK(back.summary.by_method.at("augmented").mean_train ==
        doctest::Approx(report.summary.by_method.at("augmented").mean_train));

  const std::string table = report_to_table(report);
  CHECK(table.find("FCM") != std::string::npos);
  CHECK(table.find("Augmented") != std::string::npos);
  CHECK(table.find("P1") != std::string::npos);

  const std::string csv = cells_to_csv(report);
  CHECK(csv.find("fold,c,m,method") == 0);
}
