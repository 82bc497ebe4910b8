#include "expdnn/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "expdnn/errors.hpp"
#include "expdnn/experiment.hpp"
#include "expdnn/model_io.hpp"

namespace expdnn {

namespace {

void emit(const std::string& text, const std::optional<std::string>& out_path,
          std::ostream& out) {
  if (!out_path) {
    out << text;
    return;
  }
  std::ofstream file(*out_path);
  if (!file) throw IoError("cannot open '" + *out_path + "' for writing");
  file << text;
  if (!file) throw IoError("failed while writing '" + *out_path + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty())
      throw ConfigError("empty entry in seed list '" + text + "'");
    try {
      std::size_t pos = 0;
      const std::uint64_t seed = std::stoull(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      seeds.push_back(seed);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse seed '" + item + "' in list '" + text +
                        "'");
    }
  }
  if (seeds.empty()) throw ConfigError("seed list '" + text + "' is empty");
  return seeds;
}

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> seeds(10);
  for (std::uint64_t i = 0; i < 10; ++i) seeds[i] = i;
  return seeds;
}

int run_train(const std::string& config_path,
              const std::optional<std::uint64_t>& seed_override,
              const std::string& out_path, std::ostream& err) {
  ExperimentConfig config;
  Dataset dataset;
  try {
    config = parse_experiment_config(config_path);
    if (seed_override) config.seed = *seed_override;
    dataset = resolve_dataset(config.dataset);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    const TrainResult result = train(config, dataset);
    const Dataset selected =
        config.selected_features
            ? select_features(dataset, *config.selected_features)
            : dataset;
    ModelArtifact artifact;
    artifact.network = config.network;
    artifact.params = result.params;
    artifact.meta.seed = result.seed;
    artifact.meta.epochs = config.epochs;
    artifact.meta.final_loss = result.final_loss;
    artifact.meta.dataset = dataset_id(config.dataset);
    artifact.meta.scale_features = config.scale_features;
    artifact.meta.feature_names = selected.feature_names;
    artifact.meta.target_names = selected.target_names;
    save_model(artifact, out_path);
    err << "trained " << config.epochs << " epochs on "
        << artifact.meta.dataset << " (seed " << result.seed
        << "), final loss " << result.final_loss << ", model written to "
        << out_path << "\n";
    return 0;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_explain(const std::string& model_path,
                const std::optional<std::string>& out_path, std::ostream& out,
                std::ostream& err) {
  ModelArtifact artifact;
  try {
    artifact = load_model(model_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    const ImportanceReport report =
        explain(artifact.params, artifact.meta.feature_names);
    emit(render_importance_report(report, artifact.meta.final_loss,
                                  artifact.meta.seed),
         out_path, out);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_reproduce(const std::string& case_id,
                  const std::optional<std::string>& seeds_text,
                  const std::optional<std::string>& out_path, std::ostream& out,
                  std::ostream& err) {
  std::vector<std::uint64_t> seeds;
  try {
    seeds = seeds_text ? parse_seed_list(*seeds_text) : default_seeds();
    case_config(case_id);  // validates the id before the long run
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    const CaseOutcome outcome = run_case(case_id, seeds);
    emit(render_case_outcome(outcome), out_path, out);
    for (const CaseCheck& check : outcome.checks) {
      err << (check.pass ? "ok   " : "FAIL ") << outcome.case_id << ": "
          << check.name << " [" << check.fraction << " of seeds, threshold "
          << check.threshold << "]\n";
    }
    return outcome.pass ? 0 : 1;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_gradcheck(const std::string& config_path, double tolerance, double step,
                  std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  Dataset dataset;
  try {
    config = parse_experiment_config(config_path);
    dataset = resolve_dataset(config.dataset);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    const GradCheckReport report = grad_check(config, dataset, step, tolerance);
    out << render_grad_check(report);
    err << "max relative error " << report.max_rel_error << " at "
        << report.worst_param << " (tolerance " << tolerance << "): "
        << (report.pass ? "pass" : "fail") << "\n";
    return report.pass ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"ExpDNN: train explainable networks and rank input importance"};
  app.require_subcommand(1);

  std::string config_path, model_path, out_required, case_id;
  std::optional<std::string> out_optional, seeds_text;
  std::optional<std::uint64_t> seed_override;
  double tolerance = 1e-5;
  double step = 1e-6;

  CLI::App* cmd_train =
      app.add_subcommand("train", "Train a model from a config file");
  cmd_train->add_option("--config", config_path, "experiment config JSON")
      ->required();
  cmd_train->add_option("--seed", seed_override,
                        "override the config file's seed");
  cmd_train->add_option("--out", out_required, "model artifact destination")
      ->required();

  CLI::App* cmd_explain = app.add_subcommand(
      "explain", "Rank feature importance from a trained model");
  cmd_explain->add_option("--model", model_path, "model artifact path")
      ->required();
  cmd_explain->add_option("--out", out_optional,
                          "report destination (default: stdout)");

  CLI::App* cmd_reproduce =
      app.add_subcommand("reproduce", "Run one of the bundled case studies");
  cmd_reproduce->add_option("case_id", case_id, "which case to run")->required();
  cmd_reproduce->add_option("--seeds", seeds_text,
                            "comma-separated seed list (default: 0..9)");
  cmd_reproduce->add_option("--out", out_optional,
                            "report destination (default: stdout)");

  CLI::App* cmd_gradcheck = app.add_subcommand(
      "gradcheck", "Check backprop against central finite differences");
  cmd_gradcheck->add_option("--config", config_path, "experiment config JSON")
      ->required();
  cmd_gradcheck->add_option("--tolerance", tolerance,
                            "max relative error allowed");
  cmd_gradcheck->add_option("--step", step, "finite-difference step");

  CLI::App* cmd_list =
      app.add_subcommand("list-cases", "List reproducible case ids");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return 2;
  }

  if (cmd_train->parsed())
    return run_train(config_path, seed_override, out_required, err);
  if (cmd_explain->parsed())
    return run_explain(model_path, out_optional, out, err);
  if (cmd_reproduce->parsed())
    return run_reproduce(case_id, seeds_text, out_optional, out, err);
  if (cmd_gradcheck->parsed())
    return run_gradcheck(config_path, tolerance, step, out, err);
  if (cmd_list->parsed()) {
    for (const std::string& id : list_case_ids()) out << id << "\n";
    return 0;
  }
  err << "error: no subcommand given\n";
  return 2;
}

}  // namespace expdnn
