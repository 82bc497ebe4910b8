#include "expdnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "expdnn/errors.hpp"

namespace expdnn {

Dataset resolve_dataset(const DatasetSpec& spec) {
  if (spec.is_builtin()) return builtin_dataset(spec.builtin);
  return load_csv(spec.csv_path, spec.csv_schema);
}

std::string dataset_id(const DatasetSpec& spec) {
  if (spec.is_builtin()) return "builtin:" + spec.builtin;
  return "csv:" + spec.csv_path.string();
}

namespace {

Dataset apply_selection(const ExperimentConfig& config, const Dataset& dataset) {
  Dataset selected = config.selected_features
                         ? select_features(dataset, *config.selected_features)
                         : dataset;
  if (config.scale_features) selected = scale_features_unit(selected);
  if (selected.features.cols != config.network.n_inputs)
    throw ConfigError("network expects " +
                      std::to_string(config.network.n_inputs) +
                      " inputs but the dataset provides " +
                      std::to_string(selected.features.cols) + " features");
  if (selected.targets.cols != config.network.n_outputs)
    throw ConfigError("network expects " +
                      std::to_string(config.network.n_outputs) +
                      " outputs but the dataset provides " +
                      std::to_string(selected.targets.cols) +
                      " target columns");
  for (double v : selected.features.data)
    if (!std::isfinite(v)) throw NumericError("non-finite feature value");
  for (double v : selected.targets.data)
    if (!std::isfinite(v)) throw NumericError("non-finite target value");
  return selected;
}

}  // namespace

Matrix predict(const ExpDnnParams& params, const NetworkConfig& config,
               const Matrix& features) {
  Matrix predictions(features.rows, config.n_outputs);
  ForwardTrace trace;
  Vector x(features.cols);
  for (std::size_t s = 0; s < features.rows; ++s) {
    for (std::size_t j = 0; j < features.cols; ++j) x[j] = features(s, j);
    forward_into(params, config, x, trace);
    for (std::size_t j = 0; j < config.n_outputs; ++j)
      predictions(s, j) = trace.output[j];
  }
  return predictions;
}

double batch_loss(const ExpDnnParams& params, const NetworkConfig& config,
                  const Dataset& dataset) {
  return compute_loss(config.loss, predict(params, config, dataset.features),
                      dataset.targets);
}

TrainResult train(const ExperimentConfig& config, const Dataset& dataset) {
  validate(config.network);
  validate(config.optimizer);
  if (config.loss_log_stride == 0)
    throw ConfigError("loss_log_stride must be positive");
  const Dataset data = apply_selection(config, dataset);

  Rng rng(config.seed);
  ExpDnnParams params = init_params(config.network, rng);
  NadamState state = NadamState::init(params, config.optimizer);

  const std::size_t batch = data.n_samples();
  std::vector<ForwardTrace> traces(batch);
  Matrix predictions(batch, config.network.n_outputs);
  Gradients grads = zeros_like(params);
  BackwardWorkspace ws;
  Vector x(config.network.n_inputs);

  auto epoch_loss = [&](std::uint64_t epoch) {
    for (std::size_t s = 0; s < batch; ++s) {
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = data.features(s, j);
      forward_into(params, config.network, x, traces[s]);
      for (std::size_t j = 0; j < config.network.n_outputs; ++j)
        predictions(s, j) = traces[s].output[j];
    }
    double loss;
    try {
      loss = compute_loss(config.network.loss, predictions, data.targets);
    } catch (const NumericError&) {
      throw DivergenceError(epoch, "loss became non-finite at epoch " +
                                       std::to_string(epoch));
    }
    if (!std::isfinite(loss))
      throw DivergenceError(epoch, "loss became non-finite at epoch " +
                                       std::to_string(epoch));
    return loss;
  };

  TrainResult result;
  result.seed = config.seed;
  for (std::uint64_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = epoch_loss(epoch);
    if (epoch % config.loss_log_stride == 0)
      result.loss_history.emplace_back(epoch, loss);
    backward_into(params, config.network, traces, data.targets, grads, ws);
    nadam_step_inplace(state, params, grads);
  }
  result.final_loss = epoch_loss(config.epochs);
  result.loss_history.emplace_back(config.epochs, result.final_loss);
  result.params = std::move(params);
  return result;
}

ImportanceReport explain(const ExpDnnParams& params,
                         std::span<const std::string> feature_names) {
  const std::size_t n = params.explainable_weights.size();
  if (feature_names.size() != n)
    throw ShapeError("got " + std::to_string(feature_names.size()) +
                     " feature names for " + std::to_string(n) +
                     " explainable weights");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(params.explainable_weights[a]) >
           std::abs(params.explainable_weights[b]);
  });

  ImportanceReport report;
  report.entries.resize(n);
  for (std::size_t rank = 0; rank < n; ++rank) {
    const std::size_t i = order[rank];
    const double w = params.explainable_weights[i];
    report.entries[rank] = {feature_names[i], w, std::abs(w), rank + 1};
  }
  return report;
}

Gradients finite_difference_gradients(const ExpDnnParams& params,
                                      const NetworkConfig& config,
                                      const Dataset& dataset, double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  ExpDnnParams work = params;
  Gradients fd = zeros_like(params);

  std::vector<std::vector<double>*> work_tensors;
  for_each_tensor(work, [&](const std::string&, std::vector<double>& t) {
    work_tensors.push_back(&t);
  });
  std::vector<std::vector<double>*> fd_tensors;
  for_each_tensor(fd, [&](const std::string&, std::vector<double>& t) {
    fd_tensors.push_back(&t);
  });

  for (std::size_t ti = 0; ti < work_tensors.size(); ++ti) {
    std::vector<double>& t = *work_tensors[ti];
    for (std::size_t e = 0; e < t.size(); ++e) {
      const double saved = t[e];
      t[e] = saved + step;
      const double plus = batch_loss(work, config, dataset);
      t[e] = saved - step;
      const double minus = batch_loss(work, config, dataset);
      t[e] = saved;
      (*fd_tensors[ti])[e] = (plus - minus) / (2.0 * step);
    }
  }
  return fd;
}

GradCheckReport compare_gradients(const Gradients& analytic,
                                  const Gradients& reference,
                                  double tolerance) {
  if (!same_shapes(analytic, reference))
    throw ShapeError("gradient comparison requires identical shapes");

  struct Named {
    std::string name;
    const std::vector<double>* values;
  };
  std::vector<Named> a_tensors, r_tensors;
  for_each_tensor(analytic, [&](const std::string& name,
                                const std::vector<double>& t) {
    a_tensors.push_back({name, &t});
  });
  for_each_tensor(reference, [&](const std::string& name,
                                 const std::vector<double>& t) {
    r_tensors.push_back({name, &t});
  });

  GradCheckReport report;
  report.tolerance = tolerance;
  for (std::size_t ti = 0; ti < a_tensors.size(); ++ti) {
    const std::vector<double>& a = *a_tensors[ti].values;
    const std::vector<double>& r = *r_tensors[ti].values;
    for (std::size_t e = 0; e < a.size(); ++e) {
      const double denom = std::max({std::abs(a[e]), std::abs(r[e]), 1e-8});
      const double rel = std::abs(a[e] - r[e]) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param =
            a_tensors[ti].name + "[" + std::to_string(e) + "]";
      }
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

GradCheckReport grad_check(const ExperimentConfig& config,
                           const Dataset& dataset, double step,
                           double tolerance) {
  validate(config.network);
  validate(config.optimizer);
  const Dataset data = apply_selection(config, dataset);

  Rng rng(config.seed);
  ExpDnnParams params = init_params(config.network, rng);

  // One optimizer step on random gradients leaves the all-ones symmetric
  // start without changing the parameter scale much.
  Gradients random_grads = zeros_like(params);
  for_each_tensor(random_grads, [&](const std::string&, std::vector<double>& t) {
    for (double& g : t) g = rng.uniform(-1.0, 1.0);
  });
  NadamState state = NadamState::init(params, config.optimizer);
  nadam_step_inplace(state, params, random_grads);

  std::vector<ForwardTrace> traces(data.n_samples());
  Vector x(config.network.n_inputs);
  for (std::size_t s = 0; s < data.n_samples(); ++s) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = data.features(s, j);
    forward_into(params, config.network, x, traces[s]);
  }
  const Gradients analytic =
      backward(params, config.network, traces, data.targets);
  const Gradients fd =
      finite_difference_gradients(params, config.network, data, step);

  GradCheckReport report = compare_gradients(analytic, fd, tolerance);
  report.step = step;
  return report;
}

namespace {

NetworkConfig table_network(std::size_t width, std::size_t n_outputs,
                            ActivationKind head, LossKind loss) {
  NetworkConfig net;
  net.n_inputs = width;
  net.hidden_sizes = {width, width, width};
  net.hidden_activations = {ActivationKind::linear, ActivationKind::tanh,
                            ActivationKind::tanh};
  net.n_outputs = n_outputs;
  net.output_activation = head;
  net.loss = loss;
  return net;
}

double importance_weight(const SeedRun& run, const std::string& feature) {
  for (const ImportanceEntry& e : run.report.entries)
    if (e.feature == feature) return e.signed_weight;
  throw ConfigError("feature '" + feature + "' missing from report");
}

double abs_weight(const SeedRun& run, const std::string& feature) {
  return std::abs(importance_weight(run, feature));
}

CaseCheck make_check(std::string name, std::vector<bool> per_seed,
                     double threshold) {
  CaseCheck check;
  check.name = std::move(name);
  check.per_seed = std::move(per_seed);
  check.threshold = threshold;
  std::size_t hits = 0;
  for (bool b : check.per_seed) hits += b ? 1 : 0;
  check.fraction = check.per_seed.empty()
                       ? 0.0
                       : static_cast<double>(hits) /
                             static_cast<double>(check.per_seed.size());
  check.pass = check.fraction >= threshold;
  return check;
}

template <typename Pred>
std::vector<bool> per_seed(const std::vector<SeedRun>& runs, Pred&& pred) {
  std::vector<bool> out(runs.size());
  for (std::size_t i = 0; i < runs.size(); ++i) out[i] = pred(runs[i]);
  return out;
}

std::vector<CaseCheck> evaluate_checks(const std::string& case_id,
                                       const std::vector<SeedRun>& runs) {
  std::vector<CaseCheck> checks;
  if (case_id == "case1-1") {
    checks.push_back(make_check(
        "|w(g1)| > |w(g2)|",
        per_seed(runs, [](const SeedRun& r) {
          return abs_weight(r, "g1") > abs_weight(r, "g2");
        }),
        0.9));
    checks.push_back(make_check(
        "final mse < 1e-3",
        per_seed(runs, [](const SeedRun& r) { return r.final_loss < 1e-3; }),
        0.9));
  } else if (case_id == "case1-2") {
    checks.push_back(make_check(
        "|w(g1)| strictly largest",
        per_seed(runs,
                 [](const SeedRun& r) {
                   const double g1 = abs_weight(r, "g1");
                   return g1 > abs_weight(r, "g2") &&
                          g1 > abs_weight(r, "g3") && g1 > abs_weight(r, "g4");
                 }),
        0.9));
  } else if (case_id == "case1-3") {
    checks.push_back(make_check(
        "|w(g1)| and |w(g5)| both exceed |w(g3)| and |w(g4)|",
        per_seed(runs,
                 [](const SeedRun& r) {
                   const double lo =
                       std::min(abs_weight(r, "g1"), abs_weight(r, "g5"));
                   const double hi =
                       std::max(abs_weight(r, "g3"), abs_weight(r, "g4"));
                   return lo > hi;
                 }),
        0.8));
  } else if (case_id == "case2-1") {
    auto learned = [](const SeedRun& r) {
      return r.metrics.at("xor_correct") == 1.0 && r.final_loss < 0.01;
    };
    checks.push_back(make_check(
        "XOR learned: all predictions round to r and final bce < 0.01",
        per_seed(runs, learned), 0.9));
    // Weight growth is required of every seed that learned.
    CaseCheck growth = make_check(
        "|w(q1)| > 1.2 and |w(q2)| > 1.2 in learned seeds",
        per_seed(runs,
                 [&](const SeedRun& r) {
                   if (!learned(r)) return true;  // vacuous
                   return abs_weight(r, "q1") > 1.2 && abs_weight(r, "q2") > 1.2;
                 }),
        1.0);
    checks.push_back(std::move(growth));
  } else if (case_id == "case2-2") {
    checks.push_back(make_check(
        "min(|w(q1)|, |w(q2)|) > |w(q3)|",
        per_seed(runs,
                 [](const SeedRun& r) {
                   return std::min(abs_weight(r, "q1"), abs_weight(r, "q2")) >
                          abs_weight(r, "q3");
                 }),
        0.9));
    checks.push_back(make_check(
        "w(q3) equals 1.0 exactly",
        per_seed(runs,
                 [](const SeedRun& r) {
                   return importance_weight(r, "q3") == 1.0;
                 }),
        1.0));
  } else if (case_id == "case3") {
    checks.push_back(make_check(
        "both petal weights exceed both sepal weights",
        per_seed(runs,
                 [](const SeedRun& r) {
                   const double petal = std::min(abs_weight(r, "petal_length"),
                                                 abs_weight(r, "petal_width"));
                   const double sepal = std::max(abs_weight(r, "sepal_length"),
                                                 abs_weight(r, "sepal_width"));
                   return petal > sepal;
                 }),
        0.8));
    checks.push_back(make_check(
        "training accuracy >= 0.95",
        per_seed(runs,
                 [](const SeedRun& r) { return r.metrics.at("accuracy") >= 0.95; }),
        0.9));
  }
  return checks;
}

}  // namespace

std::vector<std::string> list_case_ids() {
  return {"case1-1", "case1-2", "case1-3", "case2-1", "case2-2", "case3"};
}

ExperimentConfig case_config(std::string_view case_id) {
  ExperimentConfig config;
  config.epochs = 60000;
  if (case_id == "case1-1") {
    config.network = table_network(2, 1, ActivationKind::linear, LossKind::mse);
    config.dataset.builtin = "case1";
    config.selected_features = {{"g1", "g2"}};
  } else if (case_id == "case1-2") {
    config.network = table_network(4, 1, ActivationKind::linear, LossKind::mse);
    config.dataset.builtin = "case1";
    config.selected_features = {{"g1", "g2", "g3", "g4"}};
  } else if (case_id == "case1-3") {
    config.network = table_network(4, 1, ActivationKind::linear, LossKind::mse);
    config.dataset.builtin = "case1";
    config.selected_features = {{"g1", "g5", "g3", "g4"}};
  } else if (case_id == "case2-1") {
    config.network = table_network(2, 1, ActivationKind::sigmoid,
                                   LossKind::binary_cross_entropy);
    config.dataset.builtin = "case2";
    config.selected_features = {{"q1", "q2"}};
  } else if (case_id == "case2-2") {
    config.network = table_network(4, 1, ActivationKind::sigmoid,
                                   LossKind::binary_cross_entropy);
    config.dataset.builtin = "case2";
    config.selected_features = {{"q1", "q2", "q3", "q4"}};
  } else if (case_id == "case3") {
    config.network = table_network(4, 3, ActivationKind::softmax,
                                   LossKind::categorical_cross_entropy);
    config.dataset.builtin = "iris";
    // Raw centimeter features saturate the tanh stack at the all-ones
    // start (row sums exceed 10); standardization keeps it trainable.
    config.scale_features = true;
  } else {
    std::string valid;
    for (const std::string& id : list_case_ids()) {
      if (!valid.empty()) valid += ", ";
      valid += id;
    }
    throw ConfigError("unknown case id '" + std::string(case_id) +
                      "' (valid: " + valid + ")");
  }
  return config;
}

namespace {

SeedRun run_one_seed(const ExperimentConfig& base, const Dataset& dataset,
                     std::uint64_t seed) {
  ExperimentConfig config = base;
  config.seed = seed;
  const TrainResult result = train(config, dataset);

  const Dataset data = apply_selection(config, dataset);
  SeedRun run;
  run.seed = seed;
  run.final_loss = result.final_loss;
  run.report = explain(result.params, data.feature_names);

  const Matrix predictions = predict(result.params, config.network, data.features);
  if (config.network.loss == LossKind::binary_cross_entropy) {
    bool all_correct = true;
    for (std::size_t s = 0; s < predictions.rows; ++s)
      for (std::size_t j = 0; j < predictions.cols; ++j)
        if ((predictions(s, j) >= 0.5 ? 1.0 : 0.0) != data.targets(s, j))
          all_correct = false;
    run.metrics["xor_correct"] = all_correct ? 1.0 : 0.0;
  } else if (config.network.loss == LossKind::categorical_cross_entropy) {
    std::size_t hits = 0;
    for (std::size_t s = 0; s < predictions.rows; ++s) {
      std::size_t pred_class = 0, true_class = 0;
      for (std::size_t j = 1; j < predictions.cols; ++j) {
        if (predictions(s, j) > predictions(s, pred_class)) pred_class = j;
        if (data.targets(s, j) > data.targets(s, true_class)) true_class = j;
      }
      hits += pred_class == true_class ? 1 : 0;
    }
    run.metrics["accuracy"] =
        static_cast<double>(hits) / static_cast<double>(predictions.rows);
  }
  return run;
}

}  // namespace

CaseOutcome run_case(std::string_view case_id,
                     std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw ConfigError("seed list must not be empty");
  const ExperimentConfig base = case_config(case_id);
  const Dataset dataset = resolve_dataset(base.dataset);

  CaseOutcome outcome;
  outcome.case_id = std::string(case_id);
  outcome.runs.resize(seeds.size());

  // Runs are independent and deterministic, so fanning out cannot change
  // the outcome; results are joined in seed-list order.
  std::vector<std::future<SeedRun>> futures;
  futures.reserve(seeds.size());
  for (std::uint64_t seed : seeds)
    futures.push_back(std::async(std::launch::async, run_one_seed,
                                 std::cref(base), std::cref(dataset), seed));
  for (std::size_t i = 0; i < futures.size(); ++i)
    outcome.runs[i] = futures[i].get();

  outcome.checks = evaluate_checks(outcome.case_id, outcome.runs);
  outcome.aggregate = outcome.checks.empty() ? 0.0 : outcome.checks[0].fraction;
  outcome.pass = !outcome.checks.empty();
  for (const CaseCheck& check : outcome.checks)
    outcome.pass = outcome.pass && check.pass;
  return outcome;
}

}  // namespace expdnn
