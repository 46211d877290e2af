#pragma once

// End-to-end commands behind the fairflow CLI. Each takes one JSON config,
// reads inputs, writes outputs atomically and returns a process exit code.
//
// Exit codes: 0 success / fail to reject, 3 reject, 10 I/O, 11 config,
// 12 data, 13 divergence or numerical failure, 14 anything else.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairflow/attack.hpp"
#include "fairflow/config.hpp"
#include "fairflow/csv.hpp"
#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"
#include "fairflow/fair_metric.hpp"
#include "fairflow/inference.hpp"
#include "fairflow/models.hpp"
#include "fairflow/serialize.hpp"
#include "fairflow/sim.hpp"

namespace fairflow {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int reject = 3;
inline constexpr int io = 10;
inline constexpr int config = 11;
inline constexpr int data = 12;
inline constexpr int numerical = 13;
inline constexpr int other = 14;
}  // namespace exit_code

struct RunOptions {
  std::size_t threads = 1;
  std::ostream* out = &std::cout;  // one-line summaries
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e)) return exit_code::io;
  if (dynamic_cast<const ConfigError*>(&e)) return exit_code::config;
  if (dynamic_cast<const InvalidArgument*>(&e)) return exit_code::config;
  if (dynamic_cast<const DataError*>(&e)) return exit_code::data;
  if (dynamic_cast<const DimensionError*>(&e)) return exit_code::data;
  if (dynamic_cast<const DivergenceError*>(&e)) return exit_code::numerical;
  if (dynamic_cast<const NoBaselineErrors*>(&e)) return exit_code::numerical;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return exit_code::io;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return exit_code::config;
  return exit_code::other;
}

namespace cmd {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Shared config sections.

inline StepSchedule read_schedule(ConfigReader& parent, const StepSchedule& fallback) {
  ConfigReader r = parent.child("step_schedule");
  const std::string kind =
      r.get<std::string>("kind", fallback.kind == StepSchedule::Kind::constant ? "constant" : "decay");
  StepSchedule s;
  if (kind == "constant") {
    s = StepSchedule::constant(r.get("eta", fallback.kind == StepSchedule::Kind::constant ? fallback.scale : 0.01));
  } else if (kind == "decay") {
    const bool same = fallback.kind == StepSchedule::Kind::decay;
    const double scale = r.get("scale", same ? fallback.scale : 0.02);
    const double exponent = r.get("exponent", same ? fallback.exponent : 2.0 / 3.0);
    s = StepSchedule::decay(scale, exponent);
  } else {
    throw ConfigError(r.where() + ".kind: expected 'constant' or 'decay', got '" + kind + "'");
  }
  parent.put("step_schedule", r.finish());
  return s;
}

/// "attack": {preset, lambda, step_schedule, num_steps, horizon, divergence_radius}.
inline AttackConfig read_attack(ConfigReader& parent, const std::string& default_preset) {
  ConfigReader r = parent.child("attack");
  const std::string preset = r.get<std::string>("preset", default_preset);
  AttackConfig base;
  if (preset == "audit") {
    base = AttackConfig::audit_preset();
  } else if (preset == "sim") {
    base = AttackConfig::sim_preset();
  } else {
    throw ConfigError(r.where() + ".preset: expected 'audit' or 'sim', got '" + preset + "'");
  }
  AttackConfig a;
  a.lambda = r.get("lambda", base.lambda);
  a.schedule = read_schedule(r, base.schedule);
  a.num_steps = r.get("num_steps", base.num_steps);
  a.horizon = r.optional<double>("horizon");
  a.divergence_radius = r.get("divergence_radius", base.divergence_radius);
  try {
    a.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  parent.put("attack", r.finish());
  return a;
}

inline Vec2 read_vec2(ConfigReader& r, const std::string& key, const Vec2& fallback) {
  const auto v = r.get<std::vector<double>>(key, {fallback[0], fallback[1]});
  if (v.size() != 2) throw ConfigError(r.where() + "." + key + ": expected 2 numbers");
  return {v[0], v[1]};
}

inline std::array<Vec2, 2> read_vec2_pair(ConfigReader& r, const std::string& key, const std::array<Vec2, 2>& fb) {
  const auto v = r.get<std::vector<std::vector<double>>>(key, {{fb[0][0], fb[0][1]}, {fb[1][0], fb[1][1]}});
  if (v.size() != 2 || v[0].size() != 2 || v[1].size() != 2) {
    throw ConfigError(r.where() + "." + key + ": expected [[a, b], [c, d]]");
  }
  return {Vec2{v[0][0], v[0][1]}, Vec2{v[1][0], v[1][1]}};
}

inline SimConfig read_sim(ConfigReader& parent) {
  ConfigReader r = parent.child("sim");
  const SimConfig d;
  SimConfig s;
  s.n_samples = r.get("n_samples", d.n_samples);
  s.minority_prob = r.get("minority_prob", d.minority_prob);
  s.group_means = read_vec2_pair(r, "group_means", d.group_means);
  s.noise_sd = r.get("noise_sd", d.noise_sd);
  s.label_weights = read_vec2_pair(r, "label_weights", d.label_weights);
  s.label_noise_var = r.get("label_noise_var", d.label_noise_var);
  s.center_labels = r.get("center_labels", d.center_labels);
  s.seed = r.get<std::uint64_t>("seed", d.seed);
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  parent.put("sim", r.finish());
  return s;
}

inline GridRange read_range(ConfigReader& parent, const std::string& key) {
  ConfigReader r = parent.child(key);
  const GridRange d;
  GridRange g{r.get("start", d.start), r.get("stop", d.stop), r.get("step", d.step)};
  try {
    g.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  parent.put(key, r.finish());
  return g;
}

/// "metric": {kind: rotated_coordinate | rotated_projection | euclidean | file, ...}.
inline FairMetric read_metric_source(ConfigReader& parent, std::size_t dim) {
  ConfigReader r = parent.child("metric");
  const std::string kind = r.get<std::string>("kind", "rotated_coordinate");
  FairMetric m;
  if (kind == "rotated_coordinate" || kind == "rotated_projection") {
    const double beta = degrees_to_radians(r.get("beta_degrees", 0.0));
    m = kind == "rotated_coordinate" ? rotated_coordinate_metric(beta) : rotated_projection_metric(beta);
  } else if (kind == "euclidean") {
    m = FairMetric::euclidean(dim);
  } else if (kind == "file") {
    m = load_metric(r.require<std::string>("path")).metric;
  } else {
    throw ConfigError(r.where() + ".kind: unknown metric kind '" + kind + "'");
  }
  if (m.dim() != dim) throw ConfigError(r.where() + ": metric dimension does not match the data");
  parent.put("metric", r.finish());
  return m;
}

inline CsvSchema read_schema(ConfigReader& r) {
  CsvSchema s;
  s.label_column = r.require<std::string>("label_column");
  s.protected_columns = r.get<std::vector<std::string>>("protected_columns", {});
  s.ignore_columns = r.get<std::vector<std::string>>("ignore_columns", {});
  return s;
}

inline double read_alpha(ConfigReader& r) {
  const double a = r.get("alpha", 0.05);
  if (!(a > 0.0 && a <= 0.5)) throw ConfigError(r.where() + ".alpha: must be in (0, 0.5]");
  return a;
}

inline double read_delta(ConfigReader& r) {
  const double d = r.get("delta", 1.25);
  if (!(d > 1.0) || !std::isfinite(d)) throw ConfigError(r.where() + ".delta: must be > 1");
  return d;
}

/// Either {"model": path, "data": csv, label_column, ...} or the simulation
/// pair {"sim": {...}, "theta": [t1, t2]} with the bias refitted on the draw.
struct ModelAndData {
  Classifier model;
  Dataset data;
};

inline void match_model_columns(const ModelFile& mf, Dataset& data) {
  if (!mf.feature_names.empty() && mf.feature_names != data.feature_names) {
    throw DataError("data feature columns do not match the model's feature_names");
  }
  if (mf.feature_scaling) apply_standardization(data, *mf.feature_scaling);
}

inline ModelAndData read_model_and_data(ConfigReader& r) {
  ModelAndData out;
  if (r.has("model")) {
    const ModelFile mf = load_model(r.require<std::string>("model"));
    const std::string path = r.require<std::string>("data");
    out.data = load_csv(path, read_schema(r), false);
    match_model_columns(mf, out.data);
    out.model = mf.model;
    return out;
  }
  const SimConfig sim = read_sim(r);
  const Vec2 theta = read_vec2(r, "theta", {4.0, 0.0});
  out.data = generate(sim);
  const Vector w{theta[0], theta[1]};
  out.model = Classifier(LogisticModel(w, fit_bias(out.data, w)));
  return out;
}

// ---------------------------------------------------------------------------
// Commands.

/// Seeded shuffle of the raw rows into disjoint train and audit files.
inline int run_split(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "split");
  const std::string data = r.require<std::string>("data");
  const std::string train_out = r.require<std::string>("train_out");
  const std::string audit_out = r.require<std::string>("audit_out");
  const double frac = r.get("audit_fraction", 0.5);
  const auto seed = r.get<std::uint64_t>("seed", 0);
  r.finish();
  if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("split.audit_fraction: must be in (0, 1)");
  const CsvTable table = read_csv(data);
  std::vector<std::size_t> order(table.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_audit = static_cast<std::size_t>(std::llround(frac * static_cast<double>(order.size())));
  CsvTable audit_t{table.header, {}, {}}, train_t{table.header, {}, {}};
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_audit ? audit_t : train_t).rows.push_back(table.rows[order[k]]);
  }
  write_file_atomic(train_out, to_csv(train_t));
  write_file_atomic(audit_out, to_csv(audit_t));
  *opts.out << "split: " << train_t.rows.size() << " train rows, " << audit_t.rows.size() << " audit rows\n";
  return exit_code::ok;
}

inline int run_train(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "train");
  const std::string data_path = r.require<std::string>("data");
  const CsvSchema schema = read_schema(r);
  const bool standardize = r.get("standardize", true);
  const std::string arch_name = r.get<std::string>("architecture", "logistic");
  Architecture arch;
  if (arch_name == "logistic") {
    arch = Architecture::logistic();
  } else if (arch_name == "mlp") {
    Activation act;
    try {
      act = activation_from_string(r.get<std::string>("activation", "tanh"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("train.activation: ") + e.what());
    }
    arch = Architecture::mlp(r.get<std::size_t>("hidden", 50), act);
  } else {
    throw ConfigError("train.architecture: expected 'logistic' or 'mlp'");
  }
  TrainConfig tc;
  tc.learning_rate = r.get("learning_rate", tc.learning_rate);
  tc.batch_size = r.get("batch_size", tc.batch_size);
  tc.num_steps = r.get("num_steps", tc.num_steps);
  tc.class_reweight = r.get("class_reweight", tc.class_reweight);
  tc.seed = r.get<std::uint64_t>("seed", tc.seed);
  const auto project = r.optional<std::string>("project_metric");
  const std::string out = r.require<std::string>("out");
  const auto summary_out = r.optional<std::string>("summary_out");
  const json resolved = r.finish();

  Dataset data = load_csv(data_path, schema, standardize);
  if (project) {
    const MetricFile mf = load_metric(*project);
    if (mf.metric.dim() != data.dim()) throw DataError("train: projection metric dimension != feature count");
    tc.preprocess_projector = mf.metric.sigma();
  }
  ModelFile mf{train(data, arch, tc), data.feature_names, data.standardization};
  save_model(mf, out);

  if (summary_out) {
    std::vector<int> pred(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) pred[i] = mf.model.predict(data.sample(i));
    json s;
    s["n"] = data.size();
    s["accuracy"] = [&] {
      std::size_t hit = 0;
      for (std::size_t i = 0; i < data.size(); ++i) hit += pred[i] == data.labels[i];
      return static_cast<double>(hit) / static_cast<double>(data.size());
    }();
    try {
      s["balanced_accuracy"] = balanced_accuracy(data.labels, pred);
    } catch (const DataError&) {
      s["balanced_accuracy"] = nullptr;
    }
    json aod = json::object();
    for (const auto& [name, col] : data.protected_attributes) {
      try {
        aod[name] = average_odds_difference(data.labels, pred, col);
      } catch (const DataError&) {
        aod[name] = nullptr;
      }
    }
    s["average_odds_difference"] = aod;
    s["config"] = resolved;
    write_json_file(*summary_out, s);
  }
  *opts.out << "train: wrote " << out << "\n";
  return exit_code::ok;
}

inline int run_metric(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "metric");
  const std::string kind = r.get<std::string>("kind", "sensitive_subspace");
  MetricFile mf;
  mf.info["kind"] = kind;
  if (kind == "sensitive_subspace") {
    const std::string data_path = r.require<std::string>("data");
    const CsvSchema schema = read_schema(r);
    const auto model_path = r.optional<std::string>("model");
    const bool standardize = r.get("standardize", true);
    SubspaceSpec spec;
    spec.protected_columns = r.get<std::vector<std::string>>("fit_columns", schema.protected_columns);
    spec.rank_tol = r.get("rank_tol", spec.rank_tol);
    TrainConfig tc = default_metric_train_config();
    tc.learning_rate = r.get("learning_rate", tc.learning_rate);
    tc.num_steps = r.get("num_steps", tc.num_steps);
    tc.seed = r.get<std::uint64_t>("seed", tc.seed);
    const std::string out = r.require<std::string>("out");
    r.finish();
    Dataset data;
    if (model_path) {
      // Reuse the model's scaling so the metric lives in the model's input space.
      data = load_csv(data_path, schema, false);
      match_model_columns(load_model(*model_path), data);
    } else {
      data = load_csv(data_path, schema, standardize);
    }
    const LearnedMetric lm = learn_sensitive_metric(data, spec, tc);
    mf.metric = lm.metric;
    mf.feature_names = data.feature_names;
    mf.feature_scaling = data.standardization;
    mf.info["used_columns"] = lm.used_columns;
    mf.info["skipped_columns"] = lm.skipped_columns;
    mf.info["sensitive_basis"] = lm.sensitive_basis;
    save_metric(mf, out);
    *opts.out << "metric: " << lm.sensitive_basis.size() << " sensitive direction(s), wrote " << out << "\n";
    return exit_code::ok;
  }
  if (kind == "rotated_coordinate" || kind == "rotated_projection") {
    const double deg = r.get("beta_degrees", 0.0);
    mf.feature_names = r.get<std::vector<std::string>>("feature_names", {"x1", "x2"});
    const std::string out = r.require<std::string>("out");
    r.finish();
    if (mf.feature_names.size() != 2) throw ConfigError("metric.feature_names: rotated metrics are 2-D");
    const double beta = degrees_to_radians(deg);
    mf.metric = kind == "rotated_coordinate" ? rotated_coordinate_metric(beta) : rotated_projection_metric(beta);
    mf.info["beta_degrees"] = deg;
    save_metric(mf, out);
    *opts.out << "metric: wrote " << out << "\n";
    return exit_code::ok;
  }
  if (kind == "euclidean") {
    const auto dim = r.require<std::size_t>("dimension");
    const std::string out = r.require<std::string>("out");
    r.finish();
    mf.metric = FairMetric::euclidean(dim);
    save_metric(mf, out);
    *opts.out << "metric: wrote " << out << "\n";
    return exit_code::ok;
  }
  throw ConfigError("metric.kind: unknown kind '" + kind + "'");
}

inline int run_audit(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "audit");
  const std::string model_path = r.require<std::string>("model");
  const std::string metric_path = r.require<std::string>("metric");
  const std::string data_path = r.require<std::string>("data");
  const CsvSchema schema = read_schema(r);
  const double alpha = read_alpha(r);
  const double delta = read_delta(r);
  const AttackConfig attack = read_attack(r, "audit");
  const bool skip_divergent = r.get("skip_divergent", false);
  const std::string report_out = r.require<std::string>("report_out");
  const auto samples_out = r.optional<std::string>("samples_out");
  const auto trace_out = r.optional<std::string>("trace_out");
  const auto trace_samples = r.get<std::vector<std::size_t>>("trace_samples", {0});
  const json resolved = r.finish();

  const ModelFile mf = load_model(model_path);
  const MetricFile metric = load_metric(metric_path);
  Dataset data = load_csv(data_path, schema, false);
  match_model_columns(mf, data);
  if (metric.metric.dim() != data.dim()) {
    throw DataError("audit: metric dimension " + std::to_string(metric.metric.dim()) + " != " +
                    std::to_string(data.dim()) + " feature columns");
  }
  const AuditReport rep =
      audit(mf.model, metric.metric, attack, data, alpha, delta, {skip_divergent, opts.threads});
  json j = to_json(rep);
  j["config"] = resolved;
  write_json_file(report_out, j);
  if (samples_out) write_file_atomic(*samples_out, to_csv(samples_table(rep)));
  if (trace_out) {
    std::string lines;
    for (std::size_t i : trace_samples) {
      if (i >= data.size()) throw ConfigError("audit.trace_samples: index " + std::to_string(i) + " out of range");
      const auto [end, tr] = unfair_map_traced(mf.model, metric.metric, attack, data.sample(i), data.labels[i]);
      lines += trace_jsonl(i, tr);
    }
    write_file_atomic(*trace_out, lines);
  }
  *opts.out << (rep.reject ? "reject" : "fail to reject") << ": T_n = " << format_double(rep.t_n)
            << (rep.reject ? " > " : " <= ") << "delta = " << format_double(delta) << " (n = " << rep.n << ")\n";
  return rep.reject ? exit_code::reject : exit_code::ok;
}

inline int run_simulate(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "simulate");
  const SimConfig sim = read_sim(r);
  const std::string out = r.require<std::string>("out");
  r.finish();
  const Dataset d = generate(sim);
  save_csv(d, "y", out);
  *opts.out << "simulate: " << d.size() << " rows to " << out << "\n";
  return exit_code::ok;
}

inline std::string opt_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

inline int run_sweep(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "sweep");
  const SimConfig sim = read_sim(r);
  GridSpec grid;
  {
    ConfigReader g = r.child("grid");
    grid.theta1 = read_range(g, "theta1");
    grid.theta2 = read_range(g, "theta2");
    r.put("grid", g.finish());
  }
  const FairMetric metric = read_metric_source(r, 2);
  const AttackConfig attack = read_attack(r, "sim");
  const double alpha = read_alpha(r);
  const double delta = read_delta(r);
  const std::string out = r.require<std::string>("out");
  r.finish();
  const Dataset data = generate(sim);
  const auto cells = sweep_heatmap(data, grid, metric, attack, alpha, delta, opts.threads);
  CsvTable t;
  t.header = {"theta1", "theta2", "fitted_bias", "s_n", "t_n", "reject", "diverged"};
  std::size_t rejected = 0, diverged = 0;
  for (const auto& c : cells) {
    t.rows.push_back({format_double(c.theta1), format_double(c.theta2), format_double(c.fitted_bias), opt_number(c.s_n),
                      opt_number(c.t_n), c.reject ? "1" : "0", c.diverged ? "1" : "0"});
    rejected += c.reject;
    diverged += c.diverged;
  }
  write_file_atomic(out, to_csv(t));
  *opts.out << "sweep: " << cells.size() << " cells, " << rejected << " rejected, " << diverged << " diverged\n";
  return exit_code::ok;
}

inline int run_stopping_sweep(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "stopping-sweep");
  ModelAndData md = read_model_and_data(r);
  const FairMetric metric = read_metric_source(r, md.data.dim());
  const AttackConfig attack = read_attack(r, "audit");
  const auto horizons = r.get<std::vector<double>>("horizons", {0.0, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0});
  const double alpha = read_alpha(r);
  const double delta = read_delta(r);
  const std::string out = r.require<std::string>("out");
  r.finish();
  const auto pts = stopping_time_sweep(md.model, metric, md.data, attack, horizons, alpha, delta, opts.threads);
  CsvTable t;
  t.header = {"horizon", "s_n", "t_n", "reject"};
  for (const auto& p : pts) {
    t.rows.push_back({format_double(p.horizon), format_double(p.s_n), format_double(p.t_n), p.reject ? "1" : "0"});
  }
  write_file_atomic(out, to_csv(t));
  *opts.out << "stopping-sweep: " << pts.size() << " horizons to " << out << "\n";
  return exit_code::ok;
}

inline int run_robustness(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "robustness");
  ModelAndData md = read_model_and_data(r);
  const FairMetric metric = read_metric_source(r, md.data.dim());
  const AttackConfig attack = read_attack(r, "sim");
  const auto scales = r.get<std::vector<double>>("scales", {1e-2, 1e-4, 1e-6, 0.0});
  const auto seed = r.get<std::uint64_t>("perturbation_seed", 0);
  const std::string out = r.require<std::string>("out");
  r.finish();
  const auto pts = robustness_experiment(md.model, metric, scales, md.data, attack, {seed, opts.threads});
  const auto* lr = md.model.projector() ? nullptr : std::get_if<LogisticModel>(&md.model.network());
  CsvTable t;
  t.header = {"scale", "sigma_gap", "delta_d", "max_ratio_gap", "bound"};
  for (const auto& p : pts) {
    std::string bound;
    if (lr) {
      const auto c = logistic_robustness_constants(*lr, metric, attack.lambda, attack.effective_horizon(), p.box_lo,
                                                   p.box_hi);
      bound = opt_number(c.bound(p.delta_d));
    }
    t.rows.push_back({format_double(p.scale), format_double(p.sigma_gap), format_double(p.delta_d),
                      format_double(p.max_ratio_gap), bound});
  }
  write_file_atomic(out, to_csv(t));
  *opts.out << "robustness: " << pts.size() << " scales to " << out << "\n";
  return exit_code::ok;
}

inline int run_calibrate(const json& cfg, const RunOptions& opts) {
  ConfigReader r(cfg, "calibrate");
  const auto experiments =
      r.get<std::vector<std::string>>("experiments", {"coverage", "type1", "power"});
  const double alpha = read_alpha(r);
  const double delta = read_delta(r);
  const auto n = r.get<std::size_t>("n", 500);
  const auto coverage_reps = r.get<std::size_t>("coverage_replicates", 1000);
  const auto rejection_reps = r.get<std::size_t>("rejection_replicates", 200);
  const double shape = r.get("shape", 4.0);
  const double scale = r.get("scale", 0.05);
  const auto oracle_draws = r.get<std::size_t>("oracle_draws", 1'000'000);
  const double power_offset = r.get("power_offset_sd", 5.0);
  const auto seed = r.get<std::uint64_t>("seed", 0);
  const bool wants_sim = std::find(experiments.begin(), experiments.end(), "simulation") != experiments.end();
  SimConfig sim;
  Vec2 theta{0.0, 0.0};
  FairMetric metric = rotated_coordinate_metric(0.0);
  AttackConfig attack = AttackConfig::sim_preset();
  if (wants_sim) {
    sim = read_sim(r);
    theta = read_vec2(r, "theta", theta);
    metric = read_metric_source(r, 2);
    attack = read_attack(r, "sim");
  }
  const std::string out = r.require<std::string>("out");
  r.finish();

  RatioPopulation pop{delta, shape, scale};
  CsvTable t;
  t.header = {"experiment", "tau", "oracle_mean", "replicates", "n", "coverage", "rejection_rate", "binomial_se"};
  for (const auto& e : experiments) {
    CalibrationSummary s;
    bool is_coverage = false;
    if (e == "coverage") {
      s = coverage_experiment(pop, n, coverage_reps, alpha, seed, oracle_draws, opts.threads);
      is_coverage = true;
    } else if (e == "type1") {
      s = rejection_experiment(pop, n, rejection_reps, alpha, delta, seed, opts.threads);
    } else if (e == "power") {
      RatioPopulation alt = pop;
      alt.mean = delta + power_offset * pop.sd() / std::sqrt(static_cast<double>(n));
      s = rejection_experiment(alt, n, rejection_reps, alpha, delta, seed, opts.threads);
    } else if (e == "simulation") {
      s = simulation_rejection_experiment(sim, theta, metric, attack, rejection_reps, alpha, delta, opts.threads);
    } else {
      throw ConfigError("calibrate.experiments: unknown experiment '" + e + "'");
    }
    t.rows.push_back({e, format_double(s.tau), opt_number(s.oracle_mean), std::to_string(s.replicates),
                      std::to_string(s.n), is_coverage ? format_double(s.rate) : "",
                      is_coverage ? "" : format_double(s.rate), format_double(s.binomial_se)});
  }
  write_file_atomic(out, to_csv(t));
  *opts.out << "calibrate: " << experiments.size() << " experiment(s) to " << out << "\n";
  return exit_code::ok;
}

}  // namespace cmd

inline const std::map<std::string, std::function<int(const nlohmann::json&, const RunOptions&)>>& command_table() {
  static const std::map<std::string, std::function<int(const nlohmann::json&, const RunOptions&)>> table{
      {"split", cmd::run_split},       {"train", cmd::run_train},
      {"metric", cmd::run_metric},     {"audit", cmd::run_audit},
      {"simulate", cmd::run_simulate}, {"sweep", cmd::run_sweep},
      {"stopping-sweep", cmd::run_stopping_sweep}, {"robustness", cmd::run_robustness},
      {"calibrate", cmd::run_calibrate},
  };
  return table;
}

/// Runs a command from a config file, mapping failures to exit codes and
/// printing the diagnostic to `err`.
inline int run_command(const std::string& name, const std::filesystem::path& config_path, const RunOptions& opts,
                       std::ostream& err = std::cerr) {
  const auto& table = command_table();
  const auto it = table.find(name);
  if (it == table.end()) {
    err << "error: unknown command '" << name << "'\n";
    return exit_code::config;
  }
  try {
    return it->second(read_json_file(config_path), opts);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace fairflow
