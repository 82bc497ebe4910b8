#include "expdnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "expdnn/errors.hpp"
#include "iris_data.hpp"

namespace expdnn {

bool operator==(const Dataset& a, const Dataset& b) {
  return a.features == b.features && a.targets == b.targets &&
         a.feature_names == b.feature_names && a.target_names == b.target_names;
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
    throw ParseError("cannot parse '" + cell + "' as a number at row " +
                     std::to_string(row) + ", column " + std::to_string(col));
  return value;
}

// Splits one CSV record, honoring RFC-4180 double-quote escaping.
std::vector<std::string> split_record(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw ParseError("unterminated quote in row " + std::to_string(row));
  fields.push_back(std::move(field));
  return fields;
}

void require_unique(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string> seen;
  for (const std::string& n : names)
    if (!seen.insert(n).second)
      throw ParseError(std::string("duplicate ") + what + " name '" + n + "'");
}

Dataset make_dataset(std::vector<std::string> feature_names,
                     std::vector<std::string> target_names,
                     const std::vector<std::vector<double>>& feature_rows,
                     const std::vector<std::vector<double>>& target_rows) {
  Dataset d;
  d.feature_names = std::move(feature_names);
  d.target_names = std::move(target_names);
  d.features = Matrix(feature_rows.size(), d.feature_names.size());
  d.targets = Matrix(target_rows.size(), d.target_names.size());
  for (std::size_t i = 0; i < feature_rows.size(); ++i)
    for (std::size_t j = 0; j < d.feature_names.size(); ++j)
      d.features(i, j) = feature_rows[i][j];
  for (std::size_t i = 0; i < target_rows.size(); ++i)
    for (std::size_t j = 0; j < d.target_names.size(); ++j)
      d.targets(i, j) = target_rows[i][j];
  return d;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  if (schema.target_columns.empty())
    throw ConfigError("schema must name at least one target column");
  if (schema.target_encoding == TargetEncoding::one_hot_labels &&
      schema.target_columns.size() != 1)
    throw ConfigError("one_hot_labels expects exactly one target column");

  std::ifstream file(path);
  if (!file) throw IoError("cannot open '" + path.string() + "' for reading");

  std::string line;
  if (!std::getline(file, line))
    throw ParseError("'" + path.string() + "' is empty, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_record(line, 1);
  require_unique(header, "column");

  std::vector<bool> is_target(header.size(), false);
  std::vector<std::size_t> target_idx;
  for (const std::string& t : schema.target_columns) {
    const auto it = std::find(header.begin(), header.end(), t);
    if (it == header.end())
      throw ConfigError("target column '" + t + "' is not in the header of '" +
                        path.string() + "'");
    const auto idx = static_cast<std::size_t>(it - header.begin());
    is_target[idx] = true;
    target_idx.push_back(idx);
  }

  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_idx;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!is_target[i]) {
      feature_names.push_back(header[i]);
      feature_idx.push_back(i);
    }
  }

  std::vector<std::vector<double>> feature_rows;
  std::vector<std::vector<double>> numeric_targets;
  std::vector<std::string> labels;
  std::size_t row = 1;
  while (std::getline(file, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_record(line, row);
    if (fields.size() != header.size())
      throw ParseError("row " + std::to_string(row) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    std::vector<double> frow;
    frow.reserve(feature_idx.size());
    for (std::size_t i : feature_idx)
      frow.push_back(parse_cell(fields[i], row, i + 1));
    feature_rows.push_back(std::move(frow));
    if (schema.target_encoding == TargetEncoding::numeric) {
      std::vector<double> trow;
      trow.reserve(target_idx.size());
      for (std::size_t i : target_idx)
        trow.push_back(parse_cell(fields[i], row, i + 1));
      numeric_targets.push_back(std::move(trow));
    } else {
      labels.push_back(fields[target_idx.front()]);
    }
  }
  if (feature_rows.empty())
    throw ParseError("'" + path.string() + "' has a header but no data rows");

  Dataset d;
  if (schema.target_encoding == TargetEncoding::numeric) {
    d = make_dataset(std::move(feature_names), schema.target_columns,
                     feature_rows, numeric_targets);
  } else {
    std::vector<std::string> classes;
    for (const std::string& label : labels)
      if (std::find(classes.begin(), classes.end(), label) == classes.end())
        classes.push_back(label);
    d = make_dataset(std::move(feature_names), classes, feature_rows, {});
    d.targets = one_hot(labels, classes);
  }
  return d;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  std::string line;
  for (std::size_t j = 0; j < dataset.feature_names.size(); ++j) {
    if (j) line += ',';
    line += dataset.feature_names[j];
  }
  for (const std::string& t : dataset.target_names) {
    line += ',';
    line += t;
  }
  file << line << '\n';
  for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < dataset.features.cols; ++j) {
      if (j) line += ',';
      line += format_double(dataset.features(i, j));
    }
    for (std::size_t j = 0; j < dataset.targets.cols; ++j) {
      line += ',';
      line += format_double(dataset.targets(i, j));
    }
    file << line << '\n';
  }
  if (!file) throw IoError("failed while writing '" + path.string() + "'");
}

Matrix one_hot(std::span<const std::string> labels,
               std::span<const std::string> classes) {
  Matrix out(labels.size(), classes.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::find(classes.begin(), classes.end(), labels[i]);
    if (it == classes.end())
      throw ConfigError("label '" + labels[i] + "' is not among the classes");
    out(i, static_cast<std::size_t>(it - classes.begin())) = 1.0;
  }
  return out;
}

Dataset select_features(const Dataset& d, std::span<const std::string> names) {
  std::vector<std::size_t> cols;
  cols.reserve(names.size());
  std::unordered_set<std::string> seen;
  for (const std::string& name : names) {
    const auto it =
        std::find(d.feature_names.begin(), d.feature_names.end(), name);
    if (it == d.feature_names.end())
      throw ConfigError("feature '" + name + "' is not in the dataset");
    if (!seen.insert(name).second)
      throw ConfigError("feature '" + name + "' selected twice");
    cols.push_back(static_cast<std::size_t>(it - d.feature_names.begin()));
  }

  Dataset out;
  out.feature_names.assign(names.begin(), names.end());
  out.target_names = d.target_names;
  out.targets = d.targets;
  out.features = Matrix(d.n_samples(), cols.size());
  for (std::size_t i = 0; i < d.n_samples(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out.features(i, j) = d.features(i, cols[j]);
  return out;
}

Dataset scale_features_unit(const Dataset& d) {
  Dataset out = d;
  const std::size_t rows = d.features.rows;
  for (std::size_t j = 0; j < d.features.cols; ++j) {
    double lo = d.features(0, j), hi = d.features(0, j);
    for (std::size_t i = 1; i < rows; ++i) {
      lo = std::min(lo, d.features(i, j));
      hi = std::max(hi, d.features(i, j));
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < rows; ++i)
      out.features(i, j) = (d.features(i, j) - lo) / span;
  }
  return out;
}

Dataset builtin_dataset(std::string_view case_id) {
  if (case_id == "case1") {
    // h tracks g1 exactly with offset 0.2; g2..g4 are constant; g5 = 0.8 - g1.
    const double rows[7][6] = {
        {0.1, 0.1, 0.3, 0.5, 0.7, 0.3}, {0.2, 0.1, 0.3, 0.5, 0.6, 0.4},
        {0.3, 0.1, 0.3, 0.5, 0.5, 0.5}, {0.4, 0.1, 0.3, 0.5, 0.4, 0.6},
        {0.5, 0.1, 0.3, 0.5, 0.3, 0.7}, {0.6, 0.1, 0.3, 0.5, 0.2, 0.8},
        {0.7, 0.1, 0.3, 0.5, 0.1, 0.9}};
    Dataset d;
    d.feature_names = {"g1", "g2", "g3", "g4", "g5"};
    d.target_names = {"h"};
    d.features = Matrix(7, 5);
    d.targets = Matrix(7, 1);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 5; ++j) d.features(i, j) = rows[i][j];
      d.targets(i, 0) = rows[i][5];
    }
    return d;
  }
  if (case_id == "case2") {
    // XOR of q1, q2; q3 is identically 0 and q4 identically 1.
    const double rows[4][5] = {{0, 0, 0, 1, 0},
                               {0, 1, 0, 1, 1},
                               {1, 0, 0, 1, 1},
                               {1, 1, 0, 1, 0}};
    Dataset d;
    d.feature_names = {"q1", "q2", "q3", "q4"};
    d.target_names = {"r"};
    d.features = Matrix(4, 4);
    d.targets = Matrix(4, 1);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) d.features(i, j) = rows[i][j];
      d.targets(i, 0) = rows[i][4];
    }
    return d;
  }
  if (case_id == "iris") {
    Dataset d;
    d.feature_names = {"sepal_length", "sepal_width", "petal_length",
                       "petal_width"};
    d.target_names = {"setosa", "versicolor", "virginica"};
    d.features = Matrix(150, 4);
    d.targets = Matrix(150, 3);
    for (std::size_t i = 0; i < 150; ++i) {
      for (std::size_t j = 0; j < 4; ++j)
        d.features(i, j) = detail::kIrisFeatures[i][j];
      d.targets(i, static_cast<std::size_t>(detail::kIrisSpecies[i])) = 1.0;
    }
    return d;
  }
  throw ConfigError("unknown builtin dataset '" + std::string(case_id) +
                    "' (valid: case1, case2, iris)");
}

}  // namespace expdnn
