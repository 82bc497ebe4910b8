#include "expdnn/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "expdnn/errors.hpp"

namespace expdnn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty())
    throw ParseError(what + " must be a non-empty array of rows");
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != cols)
      throw ParseError(what + " row " + std::to_string(i) + " is ragged");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!rows[i][j].is_number())
        throw ParseError(what + " has a non-numeric entry");
      m(i, j) = rows[i][j].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw ParseError(what + " must be an array");
  Vector v;
  v.reserve(arr.size());
  for (const json& e : arr) {
    if (!e.is_number()) throw ParseError(what + " has a non-numeric entry");
    v.push_back(e.get<double>());
  }
  return v;
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(where + " is missing required field '" + key + "'");
  return *it;
}

json network_to_json(const NetworkConfig& net) {
  json j;
  j["n_inputs"] = net.n_inputs;
  j["hidden_sizes"] = net.hidden_sizes;
  json acts = json::array();
  for (ActivationKind a : net.hidden_activations) acts.push_back(to_string(a));
  j["hidden_activations"] = std::move(acts);
  j["n_outputs"] = net.n_outputs;
  j["output_activation"] = to_string(net.output_activation);
  j["loss"] = to_string(net.loss);
  return j;
}

NetworkConfig network_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("'network' must be an object");
  NetworkConfig net;
  net.n_inputs = require(j, "n_inputs", "network").get<std::size_t>();
  for (const json& s : require(j, "hidden_sizes", "network"))
    net.hidden_sizes.push_back(s.get<std::size_t>());
  for (const json& a : require(j, "hidden_activations", "network"))
    net.hidden_activations.push_back(activation_from_string(a.get<std::string>()));
  net.n_outputs = require(j, "n_outputs", "network").get<std::size_t>();
  net.output_activation = activation_from_string(
      require(j, "output_activation", "network").get<std::string>());
  net.loss = loss_from_string(require(j, "loss", "network").get<std::string>());
  return net;
}

json params_to_json(const ExpDnnParams& p) {
  json j;
  j["explainable_weights"] = p.explainable_weights;
  json hw = json::array();
  for (const Matrix& w : p.hidden_weights) hw.push_back(matrix_to_json(w));
  j["hidden_weights"] = std::move(hw);
  json hb = json::array();
  for (const Vector& b : p.hidden_biases) hb.push_back(b);
  j["hidden_biases"] = std::move(hb);
  j["output_weights"] = matrix_to_json(p.output_weights);
  j["output_bias"] = p.output_bias;
  return j;
}

ExpDnnParams params_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("'params' must be an object");
  ExpDnnParams p;
  p.explainable_weights =
      vector_from_json(require(j, "explainable_weights", "params"),
                       "explainable_weights");
  for (const json& w : require(j, "hidden_weights", "params"))
    p.hidden_weights.push_back(matrix_from_json(w, "hidden_weights"));
  for (const json& b : require(j, "hidden_biases", "params"))
    p.hidden_biases.push_back(vector_from_json(b, "hidden_biases"));
  p.output_weights =
      matrix_from_json(require(j, "output_weights", "params"), "output_weights");
  p.output_bias =
      vector_from_json(require(j, "output_bias", "params"), "output_bias");
  return p;
}

json entries_to_json(const ImportanceReport& report) {
  json entries = json::array();
  for (const ImportanceEntry& e : report.entries) {
    json entry;
    entry["feature"] = e.feature;
    entry["weight"] = e.signed_weight;
    entry["abs_weight"] = e.abs_weight;
    entry["rank"] = e.rank;
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path) {
  json j;
  j["format_version"] = artifact.format_version;
  j["network"] = network_to_json(artifact.network);
  j["params"] = params_to_json(artifact.params);
  json meta;
  meta["seed"] = artifact.meta.seed;
  meta["epochs"] = artifact.meta.epochs;
  meta["final_loss"] = artifact.meta.final_loss;
  meta["dataset"] = artifact.meta.dataset;
  meta["scale_features"] = artifact.meta.scale_features;
  meta["feature_names"] = artifact.meta.feature_names;
  meta["target_names"] = artifact.meta.target_names;
  j["metadata"] = std::move(meta);

  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  file << dump_report(j);
  if (!file) throw IoError("failed while writing '" + path.string() + "'");
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream buffer;
  buffer << file.rdbuf();
  const json j = parse_json_text(buffer.str(), "model file '" + path.string() + "'");
  if (!j.is_object()) throw ParseError("model file must hold a JSON object");

  const json& version = require(j, "format_version", "model file");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
    throw ConfigError("model file '" + path.string() +
                      "' has incompatible format version " + version.dump() +
                      " (this build reads version " +
                      std::to_string(kModelFormatVersion) + ")");

  ModelArtifact artifact;
  artifact.format_version = version.get<int>();
  artifact.network = network_from_json(require(j, "network", "model file"));
  artifact.params = params_from_json(require(j, "params", "model file"));
  const json& meta = require(j, "metadata", "model file");
  artifact.meta.seed = require(meta, "seed", "metadata").get<std::uint64_t>();
  artifact.meta.epochs = require(meta, "epochs", "metadata").get<std::uint64_t>();
  artifact.meta.final_loss =
      require(meta, "final_loss", "metadata").get<double>();
  artifact.meta.dataset = require(meta, "dataset", "metadata").get<std::string>();
  if (meta.contains("scale_features"))
    artifact.meta.scale_features = meta["scale_features"].get<bool>();
  for (const json& n : require(meta, "feature_names", "metadata"))
    artifact.meta.feature_names.push_back(n.get<std::string>());
  for (const json& n : require(meta, "target_names", "metadata"))
    artifact.meta.target_names.push_back(n.get<std::string>());
  return artifact;
}

ExperimentConfig parse_experiment_config_text(const std::string& text) {
  const json j = parse_json_text(text, "config");
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig config;
  config.network = network_from_json(require(j, "network", "config"));

  const json& ds = require(j, "dataset", "config");
  if (ds.contains("builtin")) {
    config.dataset.builtin = ds["builtin"].get<std::string>();
  } else if (ds.contains("csv")) {
    const json& csv = ds["csv"];
    config.dataset.csv_path =
        require(csv, "path", "dataset.csv").get<std::string>();
    for (const json& c : require(csv, "target_columns", "dataset.csv"))
      config.dataset.csv_schema.target_columns.push_back(c.get<std::string>());
    const std::string enc =
        require(csv, "target_encoding", "dataset.csv").get<std::string>();
    if (enc == "numeric")
      config.dataset.csv_schema.target_encoding = TargetEncoding::numeric;
    else if (enc == "one_hot_labels")
      config.dataset.csv_schema.target_encoding = TargetEncoding::one_hot_labels;
    else
      throw ConfigError("target_encoding must be 'numeric' or 'one_hot_labels'");
  } else {
    throw ConfigError("'dataset' must contain either 'builtin' or 'csv'");
  }

  if (j.contains("selected_features")) {
    std::vector<std::string> names;
    for (const json& n : j["selected_features"])
      names.push_back(n.get<std::string>());
    config.selected_features = std::move(names);
  }
  if (j.contains("scale_features"))
    config.scale_features = j["scale_features"].get<bool>();
  config.epochs = require(j, "epochs", "config").get<std::uint64_t>();
  config.seed = require(j, "seed", "config").get<std::uint64_t>();
  if (j.contains("optimizer")) {
    const json& opt = j["optimizer"];
    if (opt.contains("learning_rate"))
      config.optimizer.learning_rate = opt["learning_rate"].get<double>();
    if (opt.contains("beta1")) config.optimizer.beta1 = opt["beta1"].get<double>();
    if (opt.contains("beta2")) config.optimizer.beta2 = opt["beta2"].get<double>();
    if (opt.contains("epsilon"))
      config.optimizer.epsilon = opt["epsilon"].get<double>();
    if (opt.contains("schedule_decay"))
      config.optimizer.schedule_decay = opt["schedule_decay"].get<double>();
  }
  if (j.contains("loss_log_stride"))
    config.loss_log_stride = j["loss_log_stride"].get<std::uint64_t>();

  validate(config.network);
  validate(config.optimizer);
  return config;
}

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  try {
    return parse_experiment_config_text(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
}

std::string render_importance_report(const ImportanceReport& report,
                                     double final_loss, std::uint64_t seed) {
  json j;
  j["final_loss"] = final_loss;
  j["seed"] = seed;
  j["entries"] = entries_to_json(report);
  return dump_report(j);
}

std::string render_case_outcome(const CaseOutcome& outcome) {
  json j;
  j["case_id"] = outcome.case_id;
  json seeds = json::array();
  json runs = json::array();
  for (const SeedRun& run : outcome.runs) {
    seeds.push_back(run.seed);
    json r;
    r["seed"] = run.seed;
    r["final_loss"] = run.final_loss;
    r["entries"] = entries_to_json(run.report);
    if (!run.metrics.empty()) {
      json metrics;
      for (const auto& [name, value] : run.metrics) metrics[name] = value;
      r["metrics"] = std::move(metrics);
    }
    runs.push_back(std::move(r));
  }
  j["seeds"] = std::move(seeds);
  j["runs"] = std::move(runs);

  json checks = json::array();
  for (const CaseCheck& check : outcome.checks) {
    json c;
    c["name"] = check.name;
    c["per_seed"] = check.per_seed;
    c["fraction"] = check.fraction;
    c["threshold"] = check.threshold;
    c["pass"] = check.pass;
    checks.push_back(std::move(c));
  }
  j["checks"] = std::move(checks);
  if (!outcome.checks.empty()) {
    j["predicate"] = outcome.checks[0].name;
    j["threshold"] = outcome.checks[0].threshold;
  }
  j["fraction_satisfied"] = outcome.aggregate;
  j["pass"] = outcome.pass;
  return dump_report(j);
}

std::string render_grad_check(const GradCheckReport& report) {
  json j;
  j["max_rel_error"] = report.max_rel_error;
  j["worst_param"] = report.worst_param;
  j["pass"] = report.pass;
  j["step"] = report.step;
  j["tolerance"] = report.tolerance;
  return dump_report(j);
}

}  // namespace expdnn
