#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "fairflow/serialize.hpp"
#include "fairflow/sim.hpp"

using namespace fairflow;
namespace fs = std::filesystem;

namespace {

MlpModel awkward_mlp() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  Matrix w1(5, 3);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t k = 0; k < 3; ++k) w1(j, k) = normal(rng) / 3.0;
  Vector b1(5), w2(5);
  for (double& v : b1) v = normal(rng) * 1e-7;
  for (double& v : w2) v = normal(rng) * 1e5;
  return MlpModel(std::move(w1), std::move(b1), std::move(w2), 0.1 + 0.2, Activation::softplus);
}

// Through text, as a file would be.
json reparse(const json& j) { return json::parse(j.dump(2)); }

}  // namespace

TEST(ModelJson, LogisticRoundTripIsBitExact) {
  ModelFile mf{Classifier(LogisticModel(Vector{1.0 / 3.0, -2e-308, 6.02214076e23}, -0.0)), {"a", "b", "c"}, {}};
  const ModelFile back = model_from_json(reparse(to_json(mf)));
  EXPECT_EQ(back, mf);
  EXPECT_TRUE(std::signbit(std::get<LogisticModel>(back.model.network()).bias));
}

TEST(ModelJson, MlpWithProjectorAndScalingRoundTrip) {
  ModelFile mf{Classifier(awkward_mlp(), Matrix{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}}), {"u", "v", "w"},
               Standardization{{"u", "v", "w"}, {0.1, 0.2, 0.3}, {1.0, 3.0, 1.0 / 7.0}}};
  const json j = reparse(to_json(mf));
  EXPECT_EQ(j["layer1_weights"].size(), 15u);
  const ModelFile back = model_from_json(j);
  EXPECT_EQ(back, mf);
  const Vector x{0.3, -1.0, 2.0};
  EXPECT_EQ(back.model.predict_proba(x), mf.model.predict_proba(x));
}

TEST(ModelJson, RejectsBadDocuments) {
  json j = to_json(ModelFile{Classifier(LogisticModel(Vector{1, 2}, 0.0)), {}, {}});
  json extra = j;
  extra["learning_rate"] = 0.1;
  EXPECT_THROW(model_from_json(extra), ConfigError);
  json wrong = j;
  wrong["input_dim"] = 3;
  EXPECT_THROW(model_from_json(wrong), ConfigError);
  json arch = j;
  arch["architecture"] = "svm";
  EXPECT_THROW(model_from_json(arch), ConfigError);
  json missing = j;
  missing.erase("bias");
  EXPECT_THROW(model_from_json(missing), ConfigError);
}

TEST(ModelJson, FixtureLoads) {
  const ModelFile mf = load_model(fs::path(FAIRFLOW_FIXTURES) / "constant_model.json");
  EXPECT_EQ(mf.model.input_dim(), 2u);
  EXPECT_EQ(mf.feature_names, (std::vector<std::string>{"x1", "x2"}));
}

TEST(MetricJson, RoundTripIsBitExact) {
  MetricFile mf{rotated_coordinate_metric(degrees_to_radians(10.0)), {"x1", "x2"}, {}, {{"beta_degrees", 10.0}}};
  const fs::path dir = fs::temp_directory_path() / "fairflow_serialize";
  fs::remove_all(dir);
  save_metric(mf, dir / "m.json");
  const MetricFile back = load_metric(dir / "m.json");
  EXPECT_EQ(back.metric.sigma(), mf.metric.sigma());
  EXPECT_EQ(back.feature_names, mf.feature_names);
  EXPECT_EQ(back.info, mf.info);
}

TEST(MetricJson, RejectsBadDocuments) {
  EXPECT_THROW(metric_from_json(json{{"dimension", 2}, {"sigma", {{1, 0}, {0, 1}}}, {"extra", 1}}), ConfigError);
  EXPECT_THROW(metric_from_json(json{{"dimension", 2}, {"sigma", {{1, 0}, {0, -1}}}}), ConfigError);
  EXPECT_THROW(metric_from_json(json{{"dimension", 3}, {"sigma", {{1, 0}, {0, 1}}}}), ConfigError);
  EXPECT_THROW(metric_from_json(json{{"dimension", 2}, {"sigma", {{1, 0}, {0}}}}), ConfigError);
}

TEST(JsonFiles, ErrorsAreTyped) {
  EXPECT_THROW(read_json_file("/nonexistent/fairflow.json"), IoError);
  const fs::path p = fs::temp_directory_path() / "fairflow_bad.json";
  write_file_atomic(p, "{not json");
  EXPECT_THROW(read_json_file(p), ConfigError);
}

TEST(AuditJson, KeysAndValues) {
  SimConfig sc;
  sc.n_samples = 40;
  const Dataset d = generate(sc);
  const LogisticModel constant(Vector{0, 0}, 0.4);
  const AuditReport rep = audit(constant, rotated_coordinate_metric(0.0), AttackConfig::audit_preset(), d, 0.05, 1.25);
  const json j = to_json(rep);
  for (const char* key : {"n", "s_n", "v_n", "t_n", "ci_lo", "ci_hi", "ci_one_sided_lo", "alpha", "delta", "reject",
                          "excluded_samples", "horizon", "attack", "error_rate"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["s_n"], 1.0);
  EXPECT_EQ(j["reject"], false);
  EXPECT_NEAR(j["horizon"].get<double>(), 5.0, 1e-9);
  EXPECT_EQ(j["attack"]["step_schedule"]["kind"], "constant");
  const auto table = samples_table(rep);
  EXPECT_EQ(table.header, (std::vector<std::string>{"index", "ratio", "pre01", "post01"}));
  EXPECT_EQ(table.rows.size(), 40u);
}
