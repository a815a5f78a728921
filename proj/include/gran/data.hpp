#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gran/numerics.hpp"

namespace gran {

/// A numeric dataset: N rows (objects) by n columns (attributes),
/// optionally with one class label per row.
struct RawDataset {
  Matrix features;                         // N x n
  std::vector<std::string> labels;         // empty or length N
  std::vector<std::string> feature_names;  // empty or length n
  std::string source;

  bool has_labels() const { return !labels.empty(); }
  /// Number of distinct label values (0 when unlabeled).
  int class_count() const;
};

/// Per-feature mean and (population) standard deviation.
struct NormalizationStats {
  Vector means;
  Vector stds;  // strictly positive; constant columns are clamped to 1

  /// Identity stats: mean 0, std 1 for every feature. This is what the
  /// weighted distance uses after a dataset has been z-scored.
  static NormalizationStats unit(Eigen::Index n);
};

/// Assignment of each of N data to one of k folds.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // length N, values in [0, k)

  std::vector<int> test_indices(int fold) const;
  std::vector<int> train_indices(int fold) const;
};

/// Parse a comma-delimited numeric file. When label_column is given
/// (0-based), that column becomes the labels and is removed from the
/// features. Throws ParseError / ArgumentError on malformed input.
RawDataset load_csv(const std::string& path, bool has_header,
                    std::optional<int> label_column = std::nullopt);

/// Write features (and the label column, named "class", when present)
/// back out as CSV. Deterministic byte-for-byte given the dataset.
void save_csv(const RawDataset& d, const std::string& path);

/// Z-score each feature column: subtract the mean, divide by the
/// population standard deviation. Constant columns are clamped to
/// std 1 and come out all zero.
std::pair<RawDataset, NormalizationStats> zscore(const RawDataset& d);

/// Deterministic shuffled k-fold split; fold sizes differ by at most 1.
FoldPlan kfold_split(int n, int k, std::uint64_t seed);

/// Like kfold_split but approximately class-balanced per fold.
FoldPlan stratified_kfold(const std::vector<std::string>& labels, int k,
                          std::uint64_t seed);

/// Parameters of the synthetic Gaussian-blob generator.
struct BlobSpec {
  double separation = 6.0;  // minimum center-to-center distance, in std units
};

/// n_classes isotropic unit-variance Gaussian blobs with class sizes as
/// equal as possible; labels "0".."n_classes-1". Deterministic per seed.
RawDataset synth_gaussian(int n_points, int dims, int n_classes,
                          std::uint64_t seed, const BlobSpec& spec = {});

/// splitmix64 mix step; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Extract the rows of x listed in idx, preserving order.
Matrix take_rows(const Matrix& x, const std::vector<int>& idx);

}  // namespace gran
