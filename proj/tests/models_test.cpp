#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairflow/models.hpp"

using namespace fairflow;

namespace {

double expit_ref(double z) { return 1.0 / (1.0 + std::exp(-z)); }

MlpModel random_mlp(std::uint64_t seed, std::size_t d, std::size_t h, Activation act) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix w1(h, d);
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t k = 0; k < d; ++k) w1(j, k) = normal(rng);
  Vector b1(h), w2(h);
  for (double& v : b1) v = normal(rng);
  for (double& v : w2) v = normal(rng);
  return MlpModel(std::move(w1), std::move(b1), std::move(w2), normal(rng), act);
}

// Central differences of model.loss in every coordinate.
template <class M>
Vector fd_gradient(const M& m, const Vector& x, int y, double h = 1e-5) {
  Vector g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (m.loss(xp, y) - m.loss(xm, y)) / (2.0 * h);
  }
  return g;
}

double rel_error(const Vector& a, const Vector& b) {
  return norm2(subtract(a, b)) / std::max(1e-12, std::max(norm2(a), norm2(b)));
}

}  // namespace

TEST(Logistic, ZeroModelIsHalf) {
  const LogisticModel m(Vector{0, 0}, 0.0);
  EXPECT_DOUBLE_EQ(m.predict_proba(Vector{3.0, -7.0}), 0.5);
  EXPECT_NEAR(m.loss(Vector{1, 2}, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(m.loss(Vector{1, 2}, 0), 0.6931472, 1e-7);
}

TEST(Logistic, OrthogonalDirectionIgnored) {
  const LogisticModel m(Vector{1, 0}, 0.0);
  for (double y : {-5.0, 0.0, 2.5, 100.0}) EXPECT_DOUBLE_EQ(m.predict_proba(Vector{0, y}), 0.5);
}

TEST(Logistic, ScalarExample) {
  const LogisticModel m(Vector{2}, 1.0);
  const Vector x{0.5};
  EXPECT_NEAR(m.predict_proba(x), expit_ref(2.0), 1e-15);
  EXPECT_NEAR(m.predict_proba(x), 0.8807970779, 1e-10);
  EXPECT_NEAR(m.loss(x, 0), -std::log(1.0 - expit_ref(2.0)), 1e-12);
  EXPECT_NEAR(m.loss(x, 0), 2.1269280, 1e-7);
  const Vector g = m.input_gradient(x, 0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_NEAR(g[0], 2.0 * expit_ref(2.0), 1e-15);
  EXPECT_NEAR(g[0], 1.7615942, 1e-7);
}

TEST(Logistic, ZeroWeightsGiveZeroGradient) {
  const LogisticModel m(Vector{0, 0, 0}, 4.2);
  for (double v : m.input_gradient(Vector{1, -2, 3}, 1)) EXPECT_EQ(v, 0.0);
}

TEST(Loss, ClampKeepsLossFiniteAndPositive) {
  const LogisticModel m(Vector{1}, 0.0);
  const double floor_loss = -std::log1p(-kProbFloor);
  EXPECT_DOUBLE_EQ(m.loss(Vector{1e6}, 1), floor_loss);
  EXPECT_DOUBLE_EQ(m.loss(Vector{-1e6}, 0), floor_loss);
  EXPECT_DOUBLE_EQ(m.loss(Vector{-1e6}, 1), -std::log(kProbFloor));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-60, 60);
  for (int i = 0; i < 1000; ++i) {
    const double z = u(rng);
    EXPECT_GT(m.loss(Vector{z}, i % 2), 0.0);
  }
}

TEST(Loss, RejectsBadLabel) {
  const LogisticModel m(Vector{1}, 0.0);
  EXPECT_THROW(m.loss(Vector{0.0}, 2), InvalidArgument);
}

TEST(Logistic, ProbaMonotoneInBias) {
  const Vector x{0.3, -1.2};
  double prev = 0.0;
  for (double b = -10; b <= 10; b += 0.5) {
    const double p = LogisticModel(Vector{1.5, 0.7}, b).predict_proba(x);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Logistic, PredictThreshold) {
  EXPECT_EQ(LogisticModel(Vector{1}, 0.0).predict(Vector{0.0}), 1);
  EXPECT_EQ(LogisticModel(Vector{1}, 0.0).predict(Vector{-1e-9}), 0);
}

TEST(Mlp, GradientMatchesFiniteDifferencesSeed42) {
  const MlpModel m = random_mlp(42, 3, 8, Activation::tanh);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;
  const Vector x{normal(rng), normal(rng), normal(rng)};
  for (int y : {0, 1}) EXPECT_LT(rel_error(m.input_gradient(x, y), fd_gradient(m, x, y)), 1e-5);
}

TEST(Gradients, TwentyProbesPerArchitecture) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  const std::size_t d = 4;
  const LogisticModel lr(Vector{0.8, -1.1, 0.3, 0.5}, 0.2);
  const MlpModel tanh_net = random_mlp(7, d, 10, Activation::tanh);
  const MlpModel sp_net = random_mlp(8, d, 10, Activation::softplus);
  for (int probe = 0; probe < 20; ++probe) {
    Vector x(d);
    for (double& v : x) v = normal(rng);
    const int y = probe % 2;
    EXPECT_LT(rel_error(lr.input_gradient(x, y), fd_gradient(lr, x, y)), 1e-5);
    EXPECT_LT(rel_error(tanh_net.input_gradient(x, y), fd_gradient(tanh_net, x, y)), 1e-5);
    EXPECT_LT(rel_error(sp_net.input_gradient(x, y), fd_gradient(sp_net, x, y)), 1e-5);
  }
}

TEST(Classifier, ProjectedGradientMatchesFiniteDifferences) {
  const Matrix p{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const Classifier c(random_mlp(3, 3, 6, Activation::softplus), p);
  const Vector x{0.4, -0.2, 1.1};
  EXPECT_LT(rel_error(c.input_gradient(x, 1), fd_gradient(c, x, 1)), 1e-5);
}

TEST(Train, SeparableOneDimensional) {
  Matrix x(100, 1);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < 100; ++i) {
    x(i, 0) = i < 50 ? -1.0 : 1.0;
    y[i] = i < 50 ? 0 : 1;
  }
  TrainConfig cfg;
  cfg.num_steps = 2000;
  cfg.learning_rate = 0.1;
  const Classifier c = train(x, y, Architecture::logistic(), cfg);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < 100; ++i) hit += c.predict(x.row(i)) == y[i];
  EXPECT_EQ(hit, 100u);
}

TEST(Train, ConstantFeatureRecoversInterceptOnlyFit) {
  Matrix x(200, 2);  // all zeros
  std::vector<int> y(200, 0);
  for (std::size_t i = 0; i < 60; ++i) y[i] = 1;
  TrainConfig cfg;
  cfg.class_reweight = false;
  cfg.batch_size = 200;
  const Classifier c = train(x, y, Architecture::logistic(), cfg);
  const auto& m = std::get<LogisticModel>(c.network());
  EXPECT_NEAR(m.weights[0], 0.0, 1e-3);
  EXPECT_NEAR(m.weights[1], 0.0, 1e-3);
  EXPECT_NEAR(m.bias, std::log(0.3 / 0.7), 1e-3);
}

TEST(Train, ProjectVariantIgnoresAnnihilatedCoordinate) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  Matrix x(80, 2);
  std::vector<int> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    y[i] = x(i, 0) + x(i, 1) > 0;
  }
  TrainConfig cfg;
  cfg.num_steps = 200;
  cfg.preprocess_projector = Matrix{{0, 0}, {0, 1}};
  for (const auto arch : {Architecture::logistic(), Architecture::mlp(5)}) {
    const Classifier c = train(x, y, arch, cfg);
    for (double shift : {-3.0, 0.5, 10.0}) {
      EXPECT_EQ(c.predict_proba(Vector{0.0, 0.7}), c.predict_proba(Vector{shift, 0.7}));
    }
  }
}

TEST(Train, DeterministicGivenSeed) {
  Matrix x(30, 2);
  std::vector<int> y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x(i, 0) = std::sin(static_cast<double>(i));
    x(i, 1) = std::cos(3.0 * static_cast<double>(i));
    y[i] = i % 3 == 0;
  }
  TrainConfig cfg;
  cfg.batch_size = 7;
  cfg.num_steps = 50;
  cfg.seed = 123;
  EXPECT_EQ(train(x, y, Architecture::mlp(4), cfg), train(x, y, Architecture::mlp(4), cfg));
}

TEST(Train, SingleClassWithReweightingIsDataError) {
  Matrix x(5, 1, 1.0);
  EXPECT_THROW(train(x, std::vector<int>(5, 1), Architecture::logistic(), TrainConfig{}), DataError);
}
