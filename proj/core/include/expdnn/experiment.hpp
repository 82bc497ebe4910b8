#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expdnn/data.hpp"
#include "expdnn/network.hpp"
#include "expdnn/optim.hpp"

namespace expdnn {

/// Either a builtin table name or a CSV file plus schema.
struct DatasetSpec {
  std::string builtin;
  std::filesystem::path csv_path;
  CsvSchema csv_schema;

  bool is_builtin() const { return !builtin.empty(); }
};

Dataset resolve_dataset(const DatasetSpec& spec);
std::string dataset_id(const DatasetSpec& spec);

struct ExperimentConfig {
  NetworkConfig network;
  DatasetSpec dataset;
  std::optional<std::vector<std::string>> selected_features;
  bool scale_features = false;
  std::uint64_t epochs = 60000;
  std::uint64_t seed = 0;
  NadamHyper optimizer;
  std::uint64_t loss_log_stride = 1000;
};

struct TrainResult {
  ExpDnnParams params;
  std::vector<std::pair<std::uint64_t, double>> loss_history;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
};

/// Full-batch training: init_params from the config seed, then epochs
/// iterations of forward / backward / nadam_step over the whole table.
/// Identical (config, dataset) pairs produce bitwise-identical results.
/// Throws DivergenceError with the epoch if the loss turns non-finite.
TrainResult train(const ExperimentConfig& config, const Dataset& dataset);

/// Mean loss of params over the whole dataset; shared by train and the
/// finite-difference oracle.
double batch_loss(const ExpDnnParams& params, const NetworkConfig& config,
                  const Dataset& dataset);

/// Predictions of params on every row, one row per sample.
Matrix predict(const ExpDnnParams& params, const NetworkConfig& config,
               const Matrix& features);

struct ImportanceEntry {
  std::string feature;
  double signed_weight = 0.0;
  double abs_weight = 0.0;
  std::size_t rank = 0;  // 1-based
};

/// Entries sorted by rank: descending |weight|, ties broken by input index.
struct ImportanceReport {
  std::vector<ImportanceEntry> entries;
};

ImportanceReport explain(const ExpDnnParams& params,
                         std::span<const std::string> feature_names);

/// Independent gradient oracle: central finite differences of batch_loss,
/// (L(theta+s) - L(theta-s)) / 2s per parameter entry. Only forward and
/// compute_loss are exercised, never backward.
Gradients finite_difference_gradients(const ExpDnnParams& params,
                                      const NetworkConfig& config,
                                      const Dataset& dataset, double step);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  bool pass = false;
  double step = 0.0;
  double tolerance = 0.0;
};

/// Entrywise comparison with relative error |a-f| / max(|a|, |f|, 1e-8).
GradCheckReport compare_gradients(const Gradients& analytic,
                                  const Gradients& reference, double tolerance);

/// Checks backward against the finite-difference oracle at a generic point:
/// params from the config seed pushed off the symmetric all-ones start by
/// one Nadam step on uniform random gradients. Failure is a reported
/// outcome, not an exception.
GradCheckReport grad_check(const ExperimentConfig& config,
                           const Dataset& dataset, double step,
                           double tolerance);

/// One acceptance predicate evaluated per seed.
struct CaseCheck {
  std::string name;
  std::vector<bool> per_seed;
  double fraction = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct SeedRun {
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  ImportanceReport report;
  std::map<std::string, double> metrics;
};

struct CaseOutcome {
  std::string case_id;
  std::vector<SeedRun> runs;
  std::vector<CaseCheck> checks;  // checks[0] is the ranking predicate
  double aggregate = 0.0;         // fraction satisfying the ranking predicate
  bool pass = false;              // all checks met their thresholds
};

std::vector<std::string> list_case_ids();

/// Architecture, loss, feature selection and epoch count for one case id:
/// case1-1, case1-2, case1-3, case2-1, case2-2 or case3.
ExperimentConfig case_config(std::string_view case_id);

/// Trains every seed (runs fan out in parallel, results are joined in seed
/// order), explains, and evaluates the case predicates.
CaseOutcome run_case(std::string_view case_id,
                     std::span<const std::uint64_t> seeds);

}  // namespace expdnn
