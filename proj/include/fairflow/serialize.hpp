#pragma once

// JSON files for models, metrics and audit reports. Parameters are written with
// shortest round-trip formatting, so load(save(m)) == m bit for bit.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairflow/attack.hpp"
#include "fairflow/csv.hpp"
#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"
#include "fairflow/fair_metric.hpp"
#include "fairflow/inference.hpp"
#include "fairflow/linalg.hpp"
#include "fairflow/models.hpp"

namespace fairflow {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T field(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
  }
}

inline json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

inline Matrix matrix_from_rows(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  std::vector<double> data;
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> r;
    try {
      r = j[i].get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigError(where + ": row " + std::to_string(i) + ": " + e.what());
    }
    if (i == 0) cols = r.size();
    if (r.size() != cols) throw ConfigError(where + ": ragged matrix at row " + std::to_string(i));
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows, cols, std::move(data));
}

inline json standardization_to_json(const Standardization& s) {
  return {{"columns", s.columns}, {"mean", s.mean}, {"sd", s.sd}};
}

inline Standardization standardization_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"columns", "mean", "sd"}, where);
  Standardization s;
  s.columns = field<std::vector<std::string>>(j, "columns", where);
  s.mean = field<Vector>(j, "mean", where);
  s.sd = field<Vector>(j, "sd", where);
  if (s.mean.size() != s.columns.size() || s.sd.size() != s.columns.size()) {
    throw ConfigError(where + ": columns/mean/sd lengths differ");
  }
  for (double sd : s.sd)
    if (!(sd > 0.0)) throw ConfigError(where + ": sd entries must be > 0");
  return s;
}

}  // namespace detail

/// A classifier plus the column bookkeeping needed to apply it to a CSV.
struct ModelFile {
  Classifier model;
  std::vector<std::string> feature_names;
  std::optional<Standardization> feature_scaling;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

inline json to_json(const ModelFile& mf) {
  json j;
  const auto& net = mf.model.network();
  if (const auto* lr = std::get_if<LogisticModel>(&net)) {
    j["architecture"] = "logistic";
    j["input_dim"] = lr->input_dim();
    j["weights"] = lr->weights;
    j["bias"] = lr->bias;
  } else {
    const auto& mlp = std::get<MlpModel>(net);
    j["architecture"] = "mlp";
    j["activation"] = to_string(mlp.activation);
    j["hidden"] = mlp.hidden();
    j["input_dim"] = mlp.input_dim();
    j["layer1_weights"] = mlp.layer1_weights.data();
    j["layer1_bias"] = mlp.layer1_bias;
    j["layer2_weights"] = mlp.layer2_weights;
    j["layer2_bias"] = mlp.layer2_bias;
  }
  j["projector"] = mf.model.projector() ? detail::matrix_rows(*mf.model.projector()) : json(nullptr);
  if (!mf.feature_names.empty()) j["feature_names"] = mf.feature_names;
  if (mf.feature_scaling) j["feature_scaling"] = detail::standardization_to_json(*mf.feature_scaling);
  return j;
}

inline ModelFile model_from_json(const json& j, const std::string& where = "model") {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  const auto arch = detail::field<std::string>(j, "architecture", where);
  ModelFile mf;
  Classifier::Network net;
  std::size_t input_dim = 0;
  if (arch == "logistic") {
    detail::reject_unknown_keys(
        j, {"architecture", "input_dim", "weights", "bias", "projector", "feature_names", "feature_scaling"}, where);
    input_dim = detail::field<std::size_t>(j, "input_dim", where);
    auto w = detail::field<Vector>(j, "weights", where);
    if (w.size() != input_dim) throw ConfigError(where + ": weights length != input_dim");
    net = LogisticModel(std::move(w), detail::field<double>(j, "bias", where));
  } else if (arch == "mlp") {
    detail::reject_unknown_keys(j,
                                {"architecture", "activation", "hidden", "input_dim", "layer1_weights", "layer1_bias",
                                 "layer2_weights", "layer2_bias", "projector", "feature_names", "feature_scaling"},
                                where);
    input_dim = detail::field<std::size_t>(j, "input_dim", where);
    const auto hidden = detail::field<std::size_t>(j, "hidden", where);
    Activation act;
    try {
      act = activation_from_string(detail::field<std::string>(j, "activation", where));
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    auto w1 = detail::field<Vector>(j, "layer1_weights", where);
    if (w1.size() != hidden * input_dim) throw ConfigError(where + ": layer1_weights must have hidden*input_dim entries");
    auto b1 = detail::field<Vector>(j, "layer1_bias", where);
    auto w2 = detail::field<Vector>(j, "layer2_weights", where);
    if (b1.size() != hidden || w2.size() != hidden) throw ConfigError(where + ": layer sizes disagree with hidden");
    net = MlpModel(Matrix(hidden, input_dim, std::move(w1)), std::move(b1), std::move(w2),
                   detail::field<double>(j, "layer2_bias", where), act);
  } else {
    throw ConfigError(where + ": unknown architecture '" + arch + "'");
  }
  std::optional<Matrix> projector;
  if (j.contains("projector") && !j["projector"].is_null()) {
    projector = detail::matrix_from_rows(j["projector"], where + ".projector");
  }
  mf.model = Classifier(std::move(net), std::move(projector));
  if (j.contains("feature_names")) {
    mf.feature_names = detail::field<std::vector<std::string>>(j, "feature_names", where);
    if (mf.feature_names.size() != mf.model.input_dim()) throw ConfigError(where + ": feature_names length != input_dim");
  }
  if (j.contains("feature_scaling")) {
    mf.feature_scaling = detail::standardization_from_json(j["feature_scaling"], where + ".feature_scaling");
  }
  return mf;
}

/// Fair metric plus optional provenance (learned basis, rotation angle, ...).
struct MetricFile {
  FairMetric metric;
  std::vector<std::string> feature_names;
  std::optional<Standardization> feature_scaling;
  json info = json::object();
};

inline json to_json(const MetricFile& mf) {
  json j;
  j["dimension"] = mf.metric.dim();
  j["sigma"] = detail::matrix_rows(mf.metric.sigma());
  if (!mf.feature_names.empty()) j["feature_names"] = mf.feature_names;
  if (mf.feature_scaling) j["feature_scaling"] = detail::standardization_to_json(*mf.feature_scaling);
  if (!mf.info.empty()) j["info"] = mf.info;
  return j;
}

inline MetricFile metric_from_json(const json& j, const std::string& where = "metric") {
  detail::reject_unknown_keys(j, {"dimension", "sigma", "feature_names", "feature_scaling", "info"}, where);
  MetricFile mf;
  const auto dim = detail::field<std::size_t>(j, "dimension", where);
  Matrix sigma = detail::matrix_from_rows(detail::field<json>(j, "sigma", where), where + ".sigma");
  if (sigma.rows() != dim || sigma.cols() != dim) throw ConfigError(where + ": sigma is not dimension x dimension");
  try {
    mf.metric = FairMetric(std::move(sigma));
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (j.contains("feature_names")) {
    mf.feature_names = detail::field<std::vector<std::string>>(j, "feature_names", where);
    if (mf.feature_names.size() != dim) throw ConfigError(where + ": feature_names length != dimension");
  }
  if (j.contains("feature_scaling")) {
    mf.feature_scaling = detail::standardization_from_json(j["feature_scaling"], where + ".feature_scaling");
  }
  if (j.contains("info")) mf.info = j["info"];
  return mf;
}

inline json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

inline ModelFile load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path), path.string());
}
inline void save_model(const ModelFile& mf, const std::filesystem::path& path) { write_json_file(path, to_json(mf)); }

inline MetricFile load_metric(const std::filesystem::path& path) {
  return metric_from_json(read_json_file(path), path.string());
}
inline void save_metric(const MetricFile& mf, const std::filesystem::path& path) { write_json_file(path, to_json(mf)); }

// ---------------------------------------------------------------------------
// Attack settings and audit reports.

inline json to_json(const StepSchedule& s) {
  if (s.kind == StepSchedule::Kind::constant) return {{"kind", "constant"}, {"eta", s.scale}};
  return {{"kind", "decay"}, {"scale", s.scale}, {"exponent", s.exponent}};
}

inline json to_json(const AttackConfig& a) {
  return {{"lambda", a.lambda},
          {"step_schedule", to_json(a.schedule)},
          {"num_steps", a.num_steps},
          {"horizon", a.horizon ? json(*a.horizon) : json(nullptr)},
          {"divergence_radius", a.divergence_radius}};
}

/// Non-finite values become null (JSON has no NaN).
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const AuditReport& r) {
  json j;
  j["n"] = r.n;
  j["s_n"] = number_or_null(r.ratio.mean);
  j["v_n"] = number_or_null(r.ratio.sd);
  j["t_n"] = number_or_null(r.t_n);
  j["ci_lo"] = number_or_null(r.ci_two_sided.lo);
  j["ci_hi"] = number_or_null(r.ci_two_sided.hi);
  j["ci_one_sided_lo"] = number_or_null(r.ci_one_sided_lo);
  j["alpha"] = r.alpha;
  j["delta"] = r.delta;
  j["reject"] = r.reject;
  if (r.error_rate) {
    const auto& e = *r.error_rate;
    j["error_rate"] = {{"a_n", e.stats.a_n},         {"b_n", e.stats.b_n},
                       {"s_tilde", e.stats.s_tilde}, {"var_hat", e.stats.var_hat},
                       {"t_tilde", e.t_tilde},       {"reject", e.reject}};
  } else {
    j["error_rate"] = nullptr;
    j["error_rate_note"] = r.error_rate_note;
  }
  j["excluded_samples"] = r.excluded;
  j["horizon"] = r.horizon;
  j["attack"] = to_json(r.attack);
  return j;
}

/// Per-sample CSV: index, ratio, pre01, post01 (diverged samples are absent).
inline CsvTable samples_table(const AuditReport& r) {
  CsvTable t;
  t.header = {"index", "ratio", "pre01", "post01"};
  for (const auto& s : r.samples) {
    if (s.diverged) continue;
    t.rows.push_back({std::to_string(s.index), format_double(s.ratio), std::to_string(s.pre01),
                      std::to_string(s.post01)});
  }
  return t;
}

/// One JSON object per line and iterate: sample, step, t, x, loss, penalty.
inline std::string trace_jsonl(std::size_t sample, const AttackTrace& tr) {
  std::string out;
  double t = 0.0;
  for (std::size_t k = 0; k < tr.iterates.size(); ++k) {
    if (k > 0) t += tr.step_sizes[k - 1];
    json line = {{"sample", sample},       {"step", k},
                 {"t", t},                 {"x", tr.iterates[k]},
                 {"loss", tr.losses[k]},   {"penalty", tr.penalties[k]}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace fairflow
