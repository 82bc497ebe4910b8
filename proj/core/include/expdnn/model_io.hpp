#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "expdnn/experiment.hpp"
#include "expdnn/network.hpp"

namespace expdnn {

inline constexpr int kModelFormatVersion = 1;

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::uint64_t epochs = 0;
  double final_loss = 0.0;
  std::string dataset;
  bool scale_features = false;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
};

/// A trained model on disk: JSON with reals rendered as shortest round-trip
/// decimals, so save followed by load reproduces the parameters bit for bit.
struct ModelArtifact {
  int format_version = kModelFormatVersion;
  NetworkConfig network;
  ExpDnnParams params;
  TrainingMeta meta;
};

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

/// Parses the documented experiment config JSON document.
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config_text(const std::string& text);

/// Deterministic report rendering: sorted keys, shortest round-trip reals,
/// trailing newline. Emitting the same inputs twice is byte-identical.
std::string render_importance_report(const ImportanceReport& report,
                                     double final_loss, std::uint64_t seed);
std::string render_case_outcome(const CaseOutcome& outcome);
std::string render_grad_check(const GradCheckReport& report);

}  // namespace expdnn
