#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expdnn/numerics.hpp"

namespace expdnn {

/// Tabular dataset: M samples, n features, m target columns. Immutable by
/// convention after load; every transformation returns a new Dataset.
struct Dataset {
  Matrix features;
  Matrix targets;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;

  std::size_t n_samples() const { return features.rows; }
};

bool operator==(const Dataset& a, const Dataset& b);

enum class TargetEncoding { numeric, one_hot_labels };

struct CsvSchema {
  std::vector<std::string> target_columns;
  TargetEncoding target_encoding = TargetEncoding::numeric;
};

/// Reads a UTF-8, comma-separated file with a mandatory header row.
/// RFC-4180 quoting is accepted. Non-target columns become features in
/// header order. With one_hot_labels the single target column is expanded
/// to one-hot targets, classes ordered by first appearance.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Writes header + rows; reals render as shortest round-trip decimals so a
/// reload reproduces the dataset exactly.
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

/// "case1" and "case2" are small bundled tables; "iris" is the canonical
/// 150-row measurement set with one-hot species targets.
Dataset builtin_dataset(std::string_view case_id);

/// Row i is the unit basis vector for labels[i] within classes.
Matrix one_hot(std::span<const std::string> labels,
               std::span<const std::string> classes);

/// Keeps only the named feature columns, in the given order.
Dataset select_features(const Dataset& d, std::span<const std::string> names);

/// Per-column min-max scaling to [0, 1]. Constant columns map to 0.
/// Targets are untouched.
Dataset scale_features_unit(const Dataset& d);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace expdnn
