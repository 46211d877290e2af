#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"
#include "fairflow/linalg.hpp"
#include "fairflow/models.hpp"

namespace fairflow {

/// Mahalanobis-type fair pseudo-metric d^2(x, x') = (x - x')^T sigma (x - x').
/// sigma is checked for symmetry and (randomized) positive semi-definiteness.
class FairMetric {
 public:
  FairMetric() = default;

  explicit FairMetric(Matrix sigma) : sigma_(std::move(sigma)) {
    if (!sigma_.is_square()) throw DimensionError("FairMetric: sigma must be square");
    if (max_abs_diff(sigma_, sigma_.transposed()) >= 1e-10) {
      throw InvalidArgument("FairMetric: sigma is not symmetric");
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> normal;
    Vector v(sigma_.rows());
    for (int trial = 0; trial < 32; ++trial) {
      for (double& x : v) x = normal(rng);
      if (quadratic_form(sigma_, v) < -1e-12 * std::max(1.0, dot(v, v))) {
        throw InvalidArgument("FairMetric: sigma is not positive semi-definite");
      }
    }
  }

  static FairMetric euclidean(std::size_t dim) { return FairMetric(Matrix::identity(dim)); }

  const Matrix& sigma() const noexcept { return sigma_; }
  std::size_t dim() const noexcept { return sigma_.rows(); }

  double distance_sq(ConstVecView x1, ConstVecView x2) const {
    require_same_dim(x1.size(), dim(), "distance_sq");
    require_same_dim(x2.size(), dim(), "distance_sq");
    return std::max(0.0, quadratic_form(sigma_, subtract(x1, x2)));
  }

  /// Gradient in x of distance_sq(x, x0): 2 sigma (x - x0).
  Vector distance_sq_gradient(ConstVecView x, ConstVecView x0) const {
    require_same_dim(x.size(), dim(), "distance_sq_gradient");
    require_same_dim(x0.size(), dim(), "distance_sq_gradient");
    Vector g = matvec(sigma_, subtract(x, x0));
    for (double& v : g) v *= 2.0;
    return g;
  }

  friend bool operator==(const FairMetric&, const FairMetric&) = default;

 private:
  Matrix sigma_;
};

/// diag(sin^2 beta, cos^2 beta): beta = 0 charges only the second coordinate.
inline FairMetric rotated_coordinate_metric(double beta_radians) {
  const double s = std::sin(beta_radians), c = std::cos(beta_radians);
  return FairMetric(Matrix{{s * s, 0.0}, {0.0, c * c}});
}

/// Rank-1 variant: the free (zero-cost) direction is (cos beta, sin beta), so
/// d^2 = (-sin beta * dx1 + cos beta * dx2)^2. Agrees with the diagonal form
/// on the coordinate axes and at beta = 0 or 90 degrees.
inline FairMetric rotated_projection_metric(double beta_radians) {
  const double s = std::sin(beta_radians), c = std::cos(beta_radians);
  return FairMetric(Matrix{{s * s, -s * c}, {-s * c, c * c}});
}

inline double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

struct SubspaceSpec {
  std::vector<std::string> protected_columns;
  double rank_tol = kDefaultRankTol;
};

struct LearnedMetric {
  FairMetric metric;
  std::vector<Vector> sensitive_basis;  // orthonormal
  std::vector<Vector> raw_directions;   // one fitted weight vector per used column
  std::vector<std::string> used_columns;
  std::vector<std::string> skipped_columns;  // constant protected columns
};

inline TrainConfig default_metric_train_config() {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.batch_size = 1u << 30;  // full batch
  cfg.num_steps = 2000;
  cfg.class_reweight = false;
  cfg.seed = 0;
  return cfg;
}

/// Sensitive-subspace metric: fit one logistic regression per protected column
/// on the features, orthonormalize the weight vectors, and charge only the
/// orthogonal complement of their span.
inline LearnedMetric learn_sensitive_metric(const Dataset& data, const SubspaceSpec& spec,
                                            TrainConfig cfg = default_metric_train_config()) {
  if (spec.protected_columns.empty()) throw InvalidArgument("learn_sensitive_metric: no protected columns");
  cfg.class_reweight = false;
  cfg.preprocess_projector.reset();
  LearnedMetric out;
  for (const auto& name : spec.protected_columns) {
    const auto it = data.protected_attributes.find(name);
    if (it == data.protected_attributes.end()) {
      throw DataError("learn_sensitive_metric: protected column '" + name + "' not in dataset");
    }
    const auto& g = it->second;
    for (int v : g)
      if (v != 0 && v != 1) throw DataError("learn_sensitive_metric: column '" + name + "' is not binary");
    const bool constant = std::all_of(g.begin(), g.end(), [&](int v) { return v == g.front(); });
    if (g.empty() || constant) {
      out.skipped_columns.push_back(name);
      continue;
    }
    const Classifier fit = train(data.features, g, Architecture::logistic(), cfg);
    out.raw_directions.push_back(std::get<LogisticModel>(fit.network()).weights);
    out.used_columns.push_back(name);
  }
  if (out.used_columns.empty()) {
    throw DataError("learn_sensitive_metric: every protected column is constant; nothing to learn");
  }
  out.sensitive_basis = orthonormal_basis(out.raw_directions, spec.rank_tol);
  out.metric = FairMetric(projector_orthogonal_to(out.sensitive_basis, data.dim()));
  return out;
}

}  // namespace fairflow
