#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gran/augmented.hpp"
#include "gran/data.hpp"
#include "gran/eval.hpp"
#include "gran/fcm.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gran::ArgumentError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw gran::ArgumentError("cannot write file: " + path);
  out << text;
  if (!out) throw gran::ArgumentError("write failed: " + path);
}

std::vector<double> default_m_grid() {
  std::vector<double> m;
  for (int i = 0; i <= 9; ++i) m.push_back(1.2 + 0.2 * i);  // 1.2 .. 3.0
  return m;
}

struct SynthArgs {
  int n = 300;
  int dims = 6;
  int classes = 3;
  std::uint64_t seed = 0;
  double separation = 6.0;
  std::string out;
};

int cmd_synth(const SynthArgs& args) {
  gran::BlobSpec spec;
  spec.separation = args.separation;
  gran::RawDataset d =
      gran::synth_gaussian(args.n, args.dims, args.classes, args.seed, spec);
  gran::save_csv(d, args.out);
  std::cout << "wrote " << d.features.rows() << " rows, "
            << d.features.cols() + 1 << " columns (features + class) to "
            << args.out << "\n";
  return 0;
}

struct RunArgs {
  std::string data;
  bool no_header = false;
  std::optional<int> label_column;
  int c = 2;
  double m = 2.0;
  double epsilon = 1e-5;
  int max_iter = 200;
  int restarts = 1;
  std::uint64_t seed = 0;
  std::string model_out;
  std::string recon_out;
  bool row_sum_scale = false;
};

int cmd_run(const RunArgs& args) {
  gran::RawDataset raw = gran::load_csv(args.data, !args.no_header, args.label_column);
  auto [normed, stats] = gran::zscore(raw);
  const gran::NormalizationStats unit =
      gran::NormalizationStats::unit(normed.features.cols());

  gran::FcmConfig cfg;
  cfg.c = args.c;
  cfg.m = args.m;
  cfg.epsilon = args.epsilon;
  cfg.max_iter = args.max_iter;
  cfg.restarts = args.restarts;
  cfg.seed = args.seed;
  const gran::FcmResult fit = gran::fcm_fit(normed.features, cfg, unit);

  const gran::Matrix baseline = gran::degranulate(fit.u, fit.v, args.m);
  const double base_err =
      gran::reconstruction_error(normed.features, baseline, unit);

  gran::AugmentedOptions opts;
  if (args.row_sum_scale) opts.scale = gran::ReconstructionScale::row_sum;
  const gran::AugmentedModel model =
      gran::augmented_reconstruct(normed.features, fit.v, args.m, unit, opts);
  const double aug_err =
      gran::reconstruction_error(normed.features, model.x_hat, unit);

  std::printf("fcm iterations: %d (%s)\n", fit.iterations,
              fit.converged ? "converged" : "max_iter reached");
  std::printf("baseline reconstruction error: %.6g\n", base_err);
  std::printf("augmented reconstruction error: %.6g\n", aug_err);
  if (model.diagnostics.fallback) {
    std::printf("note: TLS fallback path was taken\n");
  }

  if (!args.model_out.empty()) {
    write_file(args.model_out, gran::model_to_json(model, stats));
    std::printf("model written to %s\n", args.model_out.c_str());
  }
  if (!args.recon_out.empty()) {
    gran::RawDataset recon;
    recon.features = model.x_hat;
    recon.feature_names = raw.feature_names;
    gran::save_csv(recon, args.recon_out);
    std::printf("reconstruction written to %s\n", args.recon_out.c_str());
  }
  return 0;
}

struct BenchArgs {
  std::string data;
  bool no_header = false;
  std::optional<int> label_column;
  int folds = 10;
  std::optional<int> c_min, c_max;
  std::vector<int> grid_c;
  std::vector<double> grid_m;
  double epsilon = 1e-5;
  int max_iter = 200;
  int restarts = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string select_on = "train";
  bool stratified = false;
  bool per_fold_norm = false;
  std::string methods = "both";
  std::string json_out;
  std::string csv_out;
};

int cmd_bench(const BenchArgs& args) {
  gran::RawDataset raw = gran::load_csv(args.data, !args.no_header, args.label_column);

  gran::ExperimentConfig cfg;
  if (!args.grid_c.empty()) {
    cfg.c_values = args.grid_c;
  } else if (args.c_min && args.c_max) {
    for (int c = *args.c_min; c <= *args.c_max; ++c) cfg.c_values.push_back(c);
  } else if (raw.has_labels()) {
    // Default grid: class count C up to C+5.
    const int base = raw.class_count();
    for (int c = base; c <= base + 5; ++c) cfg.c_values.push_back(c);
  } else {
    std::cerr << "error: no labels in the data; pass --grid-c or --c-min/--c-max\n";
    return 2;
  }
  cfg.m_values = args.grid_m.empty() ? default_m_grid() : args.grid_m;
  cfg.folds = args.folds;
  cfg.seed = args.seed;
  cfg.workers = args.workers;
  cfg.stratified = args.stratified;
  cfg.per_fold_normalization = args.per_fold_norm;
  cfg.fcm.epsilon = args.epsilon;
  cfg.fcm.max_iter = args.max_iter;
  cfg.fcm.restarts = args.restarts;
  if (args.select_on == "total") {
    cfg.select_on = gran::SelectOn::total;
  } else if (args.select_on != "train") {
    std::cerr << "error: --select-on must be train or total\n";
    return 2;
  }
  if (args.methods == "baseline") {
    cfg.run_augmented = false;
  } else if (args.methods == "augmented") {
    cfg.run_baseline = false;
  } else if (args.methods != "both") {
    std::cerr << "error: --methods must be baseline, augmented or both\n";
    return 2;
  }

  const gran::EvalReport report = gran::grid_search(raw, cfg);
  std::cout << gran::report_to_table(report);
  if (!args.json_out.empty()) write_file(args.json_out, gran::report_to_json(report));
  if (!args.csv_out.empty()) write_file(args.csv_out, gran::cells_to_csv(report));
  return 0;
}

struct ReconstructArgs {
  std::string model;
  std::string data;
  bool no_header = false;
  std::optional<int> label_column;
  std::string out;
};

int cmd_reconstruct(const ReconstructArgs& args) {
  auto [model, stats] = gran::model_from_json(read_file(args.model));
  gran::RawDataset raw = gran::load_csv(args.data, !args.no_header, args.label_column);
  if (raw.features.cols() != model.prototypes.cols()) {
    throw gran::DimensionError(
        "data has " + std::to_string(raw.features.cols()) +
        " features but the model expects " +
        std::to_string(model.prototypes.cols()));
  }
  if (raw.features.rows() != model.u_hat_m.cols()) {
    throw gran::DimensionError(
        "data has " + std::to_string(raw.features.rows()) +
        " rows but the model was built for " +
        std::to_string(model.u_hat_m.cols()));
  }
  const gran::Matrix normed =
      (raw.features.rowwise() - stats.means.transpose()).array().rowwise() /
      stats.stds.transpose().array();
  const gran::NormalizationStats unit =
      gran::NormalizationStats::unit(normed.cols());
  const double err = gran::reconstruction_error(normed, model.x_hat, unit);
  std::printf("reconstruction error: %.12g\n", err);

  if (!args.out.empty()) {
    gran::RawDataset recon;
    recon.features = model.x_hat;
    recon.feature_names = raw.feature_names;
    gran::save_csv(recon, args.out);
    std::printf("reconstruction written to %s\n", args.out.c_str());
  }
  return 0;
}

int cmd_report(const std::string& json_path) {
  const gran::EvalReport report = gran::report_from_json(read_file(json_path));
  std::cout << gran::report_to_table(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy C-Means granulation-degranulation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic Gaussian-blob dataset");
  synth_cmd->add_option("--n", synth.n, "Number of points")->capture_default_str();
  synth_cmd->add_option("--dims", synth.dims, "Feature count")->capture_default_str();
  synth_cmd->add_option("--classes", synth.classes, "Number of blobs")
      ->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--separation", synth.separation, "Center separation in std units")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output CSV path")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Single fit plus both reconstructions (no CV)");
  run_cmd->add_option("--data", run.data, "Input CSV")->required();
  run_cmd->add_flag("--no-header", run.no_header, "Input has no header row");
  run_cmd->add_option("--label-column", [&run](const std::vector<std::string>& v) {
        run.label_column = std::stoi(v.at(0)); return true;
      }, "0-based label column index");
  run_cmd->add_option("--c", run.c, "Cluster count")->capture_default_str();
  run_cmd->add_option("--m", run.m, "Fuzziness coefficient (> 1)")
      ->check(CLI::Range(std::nextafter(1.0, 2.0), 1e9))->capture_default_str();
  run_cmd->add_option("--epsilon", run.epsilon, "Stopping threshold")->capture_default_str();
  run_cmd->add_option("--max-iter", run.max_iter, "Iteration cap")->capture_default_str();
  run_cmd->add_option("--restarts", run.restarts, "Seeded restarts")->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "Random seed")->capture_default_str();
  run_cmd->add_option("--model-out", run.model_out, "Write the augmented model JSON here");
  run_cmd->add_option("--recon-out", run.recon_out, "Write the reconstructed CSV here");
  run_cmd->add_flag("--row-sum-scale", run.row_sum_scale,
                    "Renormalize the reconstruction by row sums instead of theta-hat");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "10-fold cross-validated (c, m) grid benchmark");
  bench_cmd->add_option("--data", bench.data, "Input CSV")->required();
  bench_cmd->add_flag("--no-header", bench.no_header, "Input has no header row");
  bench_cmd->add_option("--label-column", [&bench](const std::vector<std::string>& v) {
        bench.label_column = std::stoi(v.at(0)); return true;
      }, "0-based label column index");
  bench_cmd->add_option("--folds", bench.folds, "Fold count")->capture_default_str();
  bench_cmd->add_option("--c-min", [&bench](const std::vector<std::string>& v) {
        bench.c_min = std::stoi(v.at(0)); return true;
      }, "Smallest cluster count");
  bench_cmd->add_option("--c-max", [&bench](const std::vector<std::string>& v) {
        bench.c_max = std::stoi(v.at(0)); return true;
      }, "Largest cluster count");
  bench_cmd->add_option("--grid-c", bench.grid_c, "Explicit cluster-count grid");
  bench_cmd->add_option("--grid-m", bench.grid_m, "Explicit fuzziness grid");
  bench_cmd->add_option("--epsilon", bench.epsilon, "Stopping threshold")->capture_default_str();
  bench_cmd->add_option("--max-iter", bench.max_iter, "Iteration cap")->capture_default_str();
  bench_cmd->add_option("--restarts", bench.restarts, "Seeded restarts")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--workers", bench.workers, "Concurrent grid cells")->capture_default_str();
  bench_cmd->add_option("--select-on", bench.select_on, "Cell selection metric: train or total")
      ->capture_default_str();
  bench_cmd->add_flag("--stratified", bench.stratified, "Class-balanced folds");
  bench_cmd->add_flag("--per-fold-norm", bench.per_fold_norm,
                      "Z-score per training fold instead of globally");
  bench_cmd->add_option("--methods", bench.methods, "baseline, augmented or both")
      ->capture_default_str();
  bench_cmd->add_option("--json-out", bench.json_out, "Write the JSON report here");
  bench_cmd->add_option("--csv-out", bench.csv_out, "Write the flat grid CSV here");

  ReconstructArgs recon;
  auto* recon_cmd = app.add_subcommand("reconstruct", "Decode a saved model against a dataset");
  recon_cmd->add_option("--model", recon.model, "Model JSON from `run --model-out`")->required();
  recon_cmd->add_option("--data", recon.data, "Input CSV")->required();
  recon_cmd->add_flag("--no-header", recon.no_header, "Input has no header row");
  recon_cmd->add_option("--label-column", [&recon](const std::vector<std::string>& v) {
        recon.label_column = std::stoi(v.at(0)); return true;
      }, "0-based label column index");
  recon_cmd->add_option("--out", recon.out, "Write the reconstructed CSV here");

  std::string report_json;
  auto* report_cmd = app.add_subcommand("report", "Render a saved JSON report as a table");
  report_cmd->add_option("--json", report_json, "Report JSON from `bench --json-out`")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (run_cmd->parsed()) return cmd_run(run);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    if (recon_cmd->parsed()) return cmd_reconstruct(recon);
    if (report_cmd->parsed()) return cmd_report(report_json);
  } catch (const gran::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
