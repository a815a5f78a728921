#include "gran/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace gran {

int RawDataset::class_count() const {
  if (labels.empty()) return 0;
  std::set<std::string> distinct(labels.begin(), labels.end());
  return static_cast<int>(distinct.size());
}

NormalizationStats NormalizationStats::unit(Eigen::Index n) {
  return NormalizationStats{Vector::Zero(n), Vector::Ones(n)};
}

std::vector<int> FoldPlan::test_indices(int fold) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(assignments.size()); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<int> FoldPlan::train_indices(int fold) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(assignments.size()); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, long row, long col) {
  const std::string s = trim(raw);
  if (s.empty()) {
    throw ParseError("empty cell at row " + std::to_string(row) + ", column " +
                         std::to_string(col),
                     row, col);
  }
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("non-numeric cell '" + s + "' at row " +
                         std::to_string(row) + ", column " + std::to_string(col),
                     row, col);
  }
  return value;
}

}  // namespace

RawDataset load_csv(const std::string& path, bool has_header,
                    std::optional<int> label_column) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open file: " + path);

  RawDataset d;
  d.source = path;

  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (first && has_header) {
      d.feature_names.assign(cells.begin(), cells.end());
      first = false;
      continue;
    }
    first = false;
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw ArgumentError("no data rows in file: " + path);

  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw ParseError("ragged row " + std::to_string(r + 1) + ": expected " +
                           std::to_string(width) + " cells, got " +
                           std::to_string(rows[r].size()),
                       static_cast<long>(r + 1), 0);
    }
  }

  int label = label_column.value_or(-1);
  if (label >= static_cast<int>(width)) {
    throw ArgumentError("label column " + std::to_string(label) +
                        " out of range for " + std::to_string(width) +
                        " columns");
  }
  const std::size_t n_feat = label >= 0 ? width - 1 : width;
  if (n_feat == 0) throw ArgumentError("no feature columns in " + path);

  d.features.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(n_feat));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Eigen::Index fc = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == label) {
        d.labels.push_back(trim(rows[r][c]));
      } else {
        d.features(static_cast<Eigen::Index>(r), fc++) =
            parse_cell(rows[r][c], static_cast<long>(r + 1),
                       static_cast<long>(c + 1));
      }
    }
  }
  if (label >= 0 && !d.feature_names.empty()) {
    d.feature_names.erase(d.feature_names.begin() + label);
  }
  require_finite(d.features, "csv features");
  return d;
}

void save_csv(const RawDataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write file: " + path);
  const Eigen::Index n = d.features.cols();

  if (!d.feature_names.empty()) {
    for (Eigen::Index c = 0; c < n; ++c) {
      if (c) out << ',';
      out << d.feature_names[static_cast<std::size_t>(c)];
    }
    if (d.has_labels()) out << ",class";
    out << '\n';
  } else {
    for (Eigen::Index c = 0; c < n; ++c) {
      if (c) out << ',';
      out << 'f' << c;
    }
    if (d.has_labels()) out << ",class";
    out << '\n';
  }

  char buf[32];
  for (Eigen::Index r = 0; r < d.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", d.features(r, c));
      out << buf;
    }
    if (d.has_labels()) out << ',' << d.labels[static_cast<std::size_t>(r)];
    out << '\n';
  }
  if (!out) throw ArgumentError("write failed: " + path);
}

std::pair<RawDataset, NormalizationStats> zscore(const RawDataset& d) {
  const Eigen::Index N = d.features.rows();
  const Eigen::Index n = d.features.cols();
  if (N < 2) throw ArgumentError("zscore needs at least 2 rows");

  NormalizationStats stats;
  stats.means = d.features.colwise().mean();
  stats.stds.resize(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double var =
        (d.features.col(c).array() - stats.means(c)).square().sum() /
        static_cast<double>(N);
    const double sd = std::sqrt(var);
    stats.stds(c) = sd > 0 ? sd : 1.0;  // constant column -> clamp
  }

  RawDataset out = d;
  out.features = (d.features.rowwise() - stats.means.transpose()).array()
                     .rowwise() /
                 stats.stds.transpose().array();
  return {std::move(out), std::move(stats)};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

FoldPlan kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw ArgumentError("fold count " + std::to_string(k) +
                        " must be in [2, " + std::to_string(n) + "]");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    plan.assignments[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i % k;
  }
  return plan;
}

FoldPlan stratified_kfold(const std::vector<std::string>& labels, int k,
                          std::uint64_t seed) {
  const int n = static_cast<int>(labels.size());
  if (k < 2 || k > n) {
    throw ArgumentError("fold count " + std::to_string(k) +
                        " must be in [2, " + std::to_string(n) + "]");
  }
  // Group indices by class, shuffle within class, deal round-robin with a
  // global fold cursor so fold sizes stay within 1 of each other.
  std::map<std::string, std::vector<int>> by_class;
  for (int i = 0; i < n; ++i) by_class[labels[static_cast<std::size_t>(i)]].push_back(i);

  std::mt19937_64 rng(seed);
  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(static_cast<std::size_t>(n), 0);
  int cursor = 0;
  for (auto& [cls, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int i : idx) {
      plan.assignments[static_cast<std::size_t>(i)] = cursor % k;
      ++cursor;
    }
  }
  return plan;
}

RawDataset synth_gaussian(int n_points, int dims, int n_classes,
                          std::uint64_t seed, const BlobSpec& spec) {
  if (n_classes < 1 || dims < 1 || n_points < n_classes) {
    throw ArgumentError("invalid synthetic dataset shape");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Blob centers. When classes fit into the ambient space, scaled
  // orthonormal directions give exact pairwise distance `separation`;
  // otherwise fall back to rejection sampling.
  Matrix centers(n_classes, dims);
  if (n_classes <= dims) {
    Matrix g(dims, n_classes);
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dims, n_classes);
    centers = (spec.separation / std::sqrt(2.0)) * q.transpose();
  } else {
    const double radius = spec.separation * std::sqrt(static_cast<double>(n_classes));
    int placed = 0;
    while (placed < n_classes) {
      Eigen::RowVectorXd cand(dims);
      for (Eigen::Index j = 0; j < dims; ++j) cand(j) = radius * gauss(rng);
      bool ok = true;
      for (int p = 0; p < placed; ++p) {
        if ((centers.row(p) - cand).norm() < spec.separation) { ok = false; break; }
      }
      if (ok) centers.row(placed++) = cand;
    }
  }

  RawDataset d;
  d.source = "synthetic";
  d.features.resize(n_points, dims);
  d.labels.reserve(static_cast<std::size_t>(n_points));
  const int base = n_points / n_classes;
  const int extra = n_points % n_classes;
  Eigen::Index row = 0;
  for (int cls = 0; cls < n_classes; ++cls) {
    const int size = base + (cls < extra ? 1 : 0);
    for (int i = 0; i < size; ++i, ++row) {
      for (Eigen::Index j = 0; j < dims; ++j) {
        d.features(row, j) = centers(cls, j) + gauss(rng);
      }
      d.labels.push_back(std::to_string(cls));
    }
  }
  return d;
}

Matrix take_rows(const Matrix& x, const std::vector<int>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  }
  return out;
}

}  // namespace gran
