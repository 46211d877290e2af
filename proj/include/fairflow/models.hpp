#pragma once

// Differentiable binary classifiers. Every model here is "logit + sigmoid":
// it provides the logit and its input gradient, and LogitOps turns that into
// probability, clamped cross-entropy and the loss gradient the attack needs.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"
#include "fairflow/linalg.hpp"

namespace fairflow {

/// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] inside the loss,
/// which bounds the loss below by -log(1 - kProbFloor) > 0.
inline constexpr double kProbFloor = 1e-12;

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// Cross-entropy of a logit against label y with the probability clamp applied.
/// Works in log space: -log p = softplus(-z), -log(1-p) = softplus(z).
inline double clamped_logistic_loss(double z, int y) {
  static const double lo = -std::log1p(-kProbFloor);
  static const double hi = -std::log(kProbFloor);
  const double raw = y == 1 ? softplus(-z) : softplus(z);
  return std::clamp(raw, lo, hi);
}

enum class Activation { tanh, softplus };

inline const char* to_string(Activation a) { return a == Activation::tanh ? "tanh" : "softplus"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "softplus") return Activation::softplus;
  throw InvalidArgument("unknown activation '" + s + "' (expected tanh or softplus)");
}

namespace detail {
inline double activate(Activation a, double x) { return a == Activation::tanh ? std::tanh(x) : softplus(x); }
inline double activate_deriv(Activation a, double x) {
  if (a == Activation::tanh) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  }
  return sigmoid(x);
}
}  // namespace detail

// CRTP mixin: Derived supplies input_dim(), logit(x) and logit_gradient(x).
template <class Derived>
struct LogitOps {
  friend bool operator==(const LogitOps&, const LogitOps&) = default;

  double predict_proba(ConstVecView x) const { return sigmoid(self().logit(x)); }

  double loss(ConstVecView x, int y) const {
    require_label(y);
    return clamped_logistic_loss(self().logit(x), y);
  }

  /// d loss / dx = (p - y) * d logit / dx (unclamped sigmoid).
  Vector input_gradient(ConstVecView x, int y) const {
    require_label(y);
    Vector g = self().logit_gradient(x);
    const double r = sigmoid(self().logit(x)) - static_cast<double>(y);
    for (double& v : g) v *= r;
    return g;
  }

  /// Hard prediction; probability exactly 0.5 goes to class 1.
  int predict(ConstVecView x) const { return self().logit(x) >= 0.0 ? 1 : 0; }

 private:
  const Derived& self() const { return static_cast<const Derived&>(*this); }
};

struct LogisticModel : LogitOps<LogisticModel> {
  Vector weights;
  double bias = 0.0;

  LogisticModel() = default;
  LogisticModel(Vector w, double b) : weights(std::move(w)), bias(b) {
    if (!all_finite(weights) || !std::isfinite(bias)) {
      throw InvalidArgument("LogisticModel: non-finite parameter");
    }
  }

  std::size_t input_dim() const noexcept { return weights.size(); }

  double logit(ConstVecView x) const {
    require_same_dim(x.size(), weights.size(), "LogisticModel");
    return bias + dot(weights, x);
  }

  Vector logit_gradient(ConstVecView x) const {
    require_same_dim(x.size(), weights.size(), "LogisticModel");
    return weights;
  }

  friend bool operator==(const LogisticModel& a, const LogisticModel& b) {
    return a.weights == b.weights && a.bias == b.bias;
  }
};

/// One hidden layer, smooth activation, scalar logit output.
struct MlpModel : LogitOps<MlpModel> {
  Matrix layer1_weights;  // hidden x input
  Vector layer1_bias;
  Vector layer2_weights;
  double layer2_bias = 0.0;
  Activation activation = Activation::tanh;

  MlpModel() = default;
  MlpModel(Matrix w1, Vector b1, Vector w2, double b2, Activation act)
      : layer1_weights(std::move(w1)),
        layer1_bias(std::move(b1)),
        layer2_weights(std::move(w2)),
        layer2_bias(b2),
        activation(act) {
    require_same_dim(layer1_bias.size(), layer1_weights.rows(), "MlpModel layer1 bias");
    require_same_dim(layer2_weights.size(), layer1_weights.rows(), "MlpModel layer2 weights");
    if (!all_finite(layer1_bias) || !all_finite(layer2_weights) || !std::isfinite(layer2_bias)) {
      throw InvalidArgument("MlpModel: non-finite parameter");
    }
  }

  std::size_t input_dim() const noexcept { return layer1_weights.cols(); }
  std::size_t hidden() const noexcept { return layer1_weights.rows(); }

  Vector preactivation(ConstVecView x) const {
    require_same_dim(x.size(), input_dim(), "MlpModel");
    Vector a = matvec(layer1_weights, x);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] += layer1_bias[j];
    return a;
  }

  double logit(ConstVecView x) const {
    const Vector a = preactivation(x);
    double z = layer2_bias;
    for (std::size_t j = 0; j < a.size(); ++j) z += layer2_weights[j] * detail::activate(activation, a[j]);
    return z;
  }

  Vector logit_gradient(ConstVecView x) const {
    Vector a = preactivation(x);
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = layer2_weights[j] * detail::activate_deriv(activation, a[j]);
    return matvec_transposed(layer1_weights, a);
  }

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    return a.layer1_weights == b.layer1_weights && a.layer1_bias == b.layer1_bias &&
           a.layer2_weights == b.layer2_weights && a.layer2_bias == b.layer2_bias &&
           a.activation == b.activation;
  }
};

/// Anything the attack can drive: a loss and its gradient in input space.
template <class M>
concept DifferentiableLoss = requires(const M& m, ConstVecView x, int y) {
  { m.input_dim() } -> std::convertible_to<std::size_t>;
  { m.loss(x, y) } -> std::convertible_to<double>;
  { m.input_gradient(x, y) } -> std::convertible_to<Vector>;
};

/// A classifier that can also report probabilities and hard predictions.
template <class M>
concept ProbabilisticClassifier = DifferentiableLoss<M> && requires(const M& m, ConstVecView x) {
  { m.predict_proba(x) } -> std::convertible_to<double>;
  { m.predict(x) } -> std::convertible_to<int>;
};

/// Trained model as shipped by the toolkit: a logistic or MLP network, optionally
/// preceded by a fixed linear preprocessing x -> P x (the "Project" variant).
class Classifier : public LogitOps<Classifier> {
 public:
  using Network = std::variant<LogisticModel, MlpModel>;

  Classifier() = default;
  explicit Classifier(Network net, std::optional<Matrix> projector = std::nullopt)
      : net_(std::move(net)), projector_(std::move(projector)) {
    if (projector_) {
      if (!projector_->is_square()) throw DimensionError("Classifier: projector must be square");
      require_same_dim(projector_->cols(), network_input_dim(), "Classifier projector");
    }
  }

  const Network& network() const noexcept { return net_; }
  const std::optional<Matrix>& projector() const noexcept { return projector_; }

  std::size_t input_dim() const { return projector_ ? projector_->cols() : network_input_dim(); }

  double logit(ConstVecView x) const {
    require_same_dim(x.size(), input_dim(), "Classifier");
    if (!projector_) return std::visit([&](const auto& n) { return n.logit(x); }, net_);
    const Vector px = matvec(*projector_, x);
    return std::visit([&](const auto& n) { return n.logit(px); }, net_);
  }

  Vector logit_gradient(ConstVecView x) const {
    require_same_dim(x.size(), input_dim(), "Classifier");
    if (!projector_) return std::visit([&](const auto& n) { return n.logit_gradient(x); }, net_);
    const Vector px = matvec(*projector_, x);
    const Vector g = std::visit([&](const auto& n) { return n.logit_gradient(px); }, net_);
    return matvec_transposed(*projector_, g);
  }

  friend bool operator==(const Classifier&, const Classifier&) = default;

 private:
  std::size_t network_input_dim() const {
    return std::visit([](const auto& n) { return n.input_dim(); }, net_);
  }

  Network net_;
  std::optional<Matrix> projector_;
};

struct Architecture {
  enum class Kind { logistic, mlp };
  Kind kind = Kind::logistic;
  std::size_t hidden = 50;
  Activation activation = Activation::tanh;

  static Architecture logistic() { return {}; }
  static Architecture mlp(std::size_t hidden = 50, Activation act = Activation::tanh) {
    return {Kind::mlp, hidden, act};
  }
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 250;
  std::size_t num_steps = 2000;
  bool class_reweight = true;
  std::uint64_t seed = 0;
  std::optional<Matrix> preprocess_projector;
};

namespace detail {

// Mini-batch index stream: walks seeded permutations epoch by epoch.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed)
      : order_(n), batch_(std::min(batch, n)), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (batch_ < n) std::shuffle(order_.begin(), order_.end(), rng_);
  }

  std::vector<std::size_t> next() {
    if (batch_ == order_.size()) return order_;
    std::vector<std::size_t> out;
    out.reserve(batch_);
    while (out.size() < batch_) {
      if (pos_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t pos_ = 0;
  std::mt19937_64 rng_;
};

inline std::vector<double> class_weights(const std::vector<int>& labels, bool reweight) {
  std::vector<double> w(labels.size(), 1.0);
  if (!reweight) return w;
  std::size_t n1 = 0;
  for (int y : labels) n1 += static_cast<std::size_t>(y == 1);
  const std::size_t n0 = labels.size() - n1;
  if (n0 == 0 || n1 == 0) {
    throw DataError("train: class reweighting needs both classes present, got a single-class dataset");
  }
  const double n = static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    w[i] = labels[i] == 1 ? n / (2.0 * static_cast<double>(n1)) : n / (2.0 * static_cast<double>(n0));
  return w;
}

}  // namespace detail

/// Fits a classifier by plain mini-batch gradient descent on (optionally
/// class-reweighted) cross-entropy. Deterministic given cfg.seed.
inline Classifier train(const Matrix& features, const std::vector<int>& labels,
                        const Architecture& arch, const TrainConfig& cfg) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n == 0) throw DataError("train: empty dataset");
  require_same_dim(labels.size(), n, "train labels");
  for (int y : labels) require_label(y);
  if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("train: learning_rate must be > 0");
  if (cfg.batch_size == 0) throw InvalidArgument("train: batch_size must be positive");
  if (cfg.num_steps == 0) throw InvalidArgument("train: num_steps must be positive");

  const std::vector<double> weight = detail::class_weights(labels, cfg.class_reweight);

  // Inputs as the network sees them.
  Matrix x = features;
  if (cfg.preprocess_projector) {
    const Matrix& p = *cfg.preprocess_projector;
    if (!p.is_square()) throw DimensionError("train: projector must be square");
    require_same_dim(p.cols(), d, "train projector");
    x = matmul(features, p.transposed());
  }

  detail::BatchSampler sampler(n, cfg.batch_size, cfg.seed);
  const double lr = cfg.learning_rate;

  Classifier::Network net;
  if (arch.kind == Architecture::Kind::logistic) {
    Vector w(d, 0.0);
    double b = 0.0;
    Vector gw(d);
    for (std::size_t step = 0; step < cfg.num_steps; ++step) {
      const auto batch = sampler.next();
      std::fill(gw.begin(), gw.end(), 0.0);
      double gb = 0.0;
      for (std::size_t i : batch) {
        const auto xi = x.row(i);
        const double r = weight[i] * (sigmoid(b + dot(w, xi)) - labels[i]);
        axpy(r, xi, gw);
        gb += r;
      }
      const double scale = lr / static_cast<double>(batch.size());
      axpy(-scale, gw, w);
      b -= scale * gb;
    }
    if (!all_finite(w) || !std::isfinite(b)) throw Error("train: logistic fit produced non-finite parameters");
    net = LogisticModel(std::move(w), b);
  } else {
    const std::size_t h = arch.hidden;
    if (h == 0) throw InvalidArgument("train: hidden width must be positive");
    std::mt19937_64 init_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix w1(h, d);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(d, 1)));
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t k = 0; k < d; ++k) w1(j, k) = s1 * normal(init_rng);
    Vector b1(h, 0.0);
    Vector w2(h);
    const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
    for (double& v : w2) v = s2 * normal(init_rng);
    double b2 = 0.0;

    Matrix gw1(h, d);
    Vector gb1(h), gw2(h), a(h), act(h);
    for (std::size_t step = 0; step < cfg.num_steps; ++step) {
      const auto batch = sampler.next();
      gw1 = Matrix(h, d);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      double gb2 = 0.0;
      for (std::size_t i : batch) {
        const auto xi = x.row(i);
        double z = b2;
        for (std::size_t j = 0; j < h; ++j) {
          double s = b1[j];
          for (std::size_t k = 0; k < d; ++k) s += w1(j, k) * xi[k];
          a[j] = s;
          act[j] = detail::activate(arch.activation, s);
          z += w2[j] * act[j];
        }
        const double r = weight[i] * (sigmoid(z) - labels[i]);
        gb2 += r;
        for (std::size_t j = 0; j < h; ++j) {
          gw2[j] += r * act[j];
          const double da = r * w2[j] * detail::activate_deriv(arch.activation, a[j]);
          gb1[j] += da;
          for (std::size_t k = 0; k < d; ++k) gw1(j, k) += da * xi[k];
        }
      }
      const double scale = lr / static_cast<double>(batch.size());
      for (std::size_t j = 0; j < h; ++j) {
        for (std::size_t k = 0; k < d; ++k) w1(j, k) -= scale * gw1(j, k);
        b1[j] -= scale * gb1[j];
        w2[j] -= scale * gw2[j];
      }
      b2 -= scale * gb2;
    }
    if (!all_finite(w1.data()) || !all_finite(b1) || !all_finite(w2) || !std::isfinite(b2)) {
      throw Error("train: MLP fit produced non-finite parameters");
    }
    net = MlpModel(std::move(w1), std::move(b1), std::move(w2), b2, arch.activation);
  }
  return Classifier(std::move(net), cfg.preprocess_projector);
}

inline Classifier train(const Dataset& data, const Architecture& arch, const TrainConfig& cfg) {
  return train(data.features, data.labels, arch, cfg);
}

}  // namespace fairflow
