#pragma once

// Two-group synthetic study: data generator, (theta1, theta2) grid sweep,
// stopping-time sweep, metric-perturbation ladder, group-fairness metrics and
// Monte-Carlo calibration of the tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fairflow/attack.hpp"
#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"
#include "fairflow/fair_metric.hpp"
#include "fairflow/inference.hpp"
#include "fairflow/linalg.hpp"
#include "fairflow/models.hpp"
#include "fairflow/parallel.hpp"

namespace fairflow {

using Vec2 = std::array<double, 2>;

struct SimConfig {
  std::size_t n_samples = 400;
  double minority_prob = 0.1;
  std::array<Vec2, 2> group_means{Vec2{-1.5, 0.0}, Vec2{1.5, 0.0}};
  double noise_sd = 0.25;
  std::array<Vec2, 2> label_weights{Vec2{-0.2, -0.01}, Vec2{0.2, -0.01}};
  double label_noise_var = 1e-4;
  // Measure the label score from the group mean. With false the score is
  // w_G^T X itself, which puts nearly every sample on the positive side.
  bool center_labels = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_samples == 0) throw InvalidArgument("sim: n_samples must be positive");
    if (!(minority_prob > 0.0 && minority_prob < 1.0)) throw InvalidArgument("sim: minority_prob must be in (0, 1)");
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) throw InvalidArgument("sim: noise_sd must be > 0");
    if (!(label_noise_var >= 0.0) || !std::isfinite(label_noise_var)) {
      throw InvalidArgument("sim: label_noise_var must be >= 0");
    }
  }
};

/// 1{w_g^T (x - offset) + noise > 0}; strict, so a point on the hyperplane
/// with zero noise is labelled 0.
inline int sim_label(const SimConfig& cfg, const Vec2& x, int group, double noise) {
  const Vec2& w = cfg.label_weights[group];
  const Vec2 offset = cfg.center_labels ? cfg.group_means[group] : Vec2{0.0, 0.0};
  const double score = w[0] * (x[0] - offset[0]) + w[1] * (x[1] - offset[1]) + noise;
  return score > 0.0 ? 1 : 0;
}

/// Features "x1", "x2"; protected column "group" (1 = minority).
inline Dataset generate(const SimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution minority(cfg.minority_prob);
  std::normal_distribution<double> normal;
  const double label_sd = std::sqrt(cfg.label_noise_var);
  Dataset d;
  d.feature_names = {"x1", "x2"};
  d.features = Matrix(cfg.n_samples, 2);
  auto& group = d.protected_attributes["group"];
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const int g = minority(rng) ? 1 : 0;
    Vec2 x;
    for (int k = 0; k < 2; ++k) x[k] = cfg.group_means[g][k] + cfg.noise_sd * normal(rng);
    const double eps = label_sd * normal(rng);
    d.features(i, 0) = x[0];
    d.features(i, 1) = x[1];
    d.labels.push_back(sim_label(cfg, x, g, eps));
    group.push_back(g);
  }
  return d;
}

// ---------------------------------------------------------------------------
// Intercept fit for fixed slope weights.

inline constexpr double kMaxBias = 50.0;

/// d/db of the total (unclamped) logistic loss: sum_i sigmoid(b + w.x_i) - y_i.
inline double bias_gradient(const Dataset& data, ConstVecView w, double b) {
  double g = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) g += sigmoid(b + dot(w, data.sample(i))) - data.labels[i];
  return g;
}

inline double bias_loss(const Dataset& data, ConstVecView w, double b) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += clamped_logistic_loss(b + dot(w, data.sample(i)), data.labels[i]);
  return s;
}

/// argmin_b of the total logistic loss with slopes w, by Newton steps kept
/// inside a shrinking bracket (bisection when Newton leaves it). Clamped to
/// [-50, 50] when the minimizer is outside or does not exist.
inline double fit_bias(const Dataset& data, ConstVecView w) {
  if (data.size() == 0) throw InvalidArgument("fit_bias: empty dataset");
  require_same_dim(w.size(), data.dim(), "fit_bias");
  std::vector<double> scores(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) scores[i] = dot(w, data.sample(i));
  auto grad_and_curv = [&](double b) {
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double p = sigmoid(b + scores[i]);
      g += p - data.labels[i];
      h += p * (1.0 - p);
    }
    return std::pair{g, h};
  };
  double lo = -kMaxBias, hi = kMaxBias;
  if (grad_and_curv(lo).first >= 0.0) return lo;
  if (grad_and_curv(hi).first <= 0.0) return hi;
  // Start from the intercept-only solution when it lies inside the bracket.
  double ybar = 0.0;
  for (int y : data.labels) ybar += y;
  ybar /= static_cast<double>(data.size());
  double b = (ybar > 0.0 && ybar < 1.0) ? std::clamp(logit(ybar), lo, hi) : 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const auto [g, h] = grad_and_curv(b);
    if (g == 0.0) return b;
    if (g > 0.0) hi = b; else lo = b;
    double next = h > 0.0 ? b - g / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == b || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b))) {
      return next;
    }
    b = next;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Grid sweep.

/// start, start + step, ..., stop (inclusive up to rounding).
struct GridRange {
  double start = -4.0;
  double stop = 4.0;
  double step = 0.4;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop)) {
      throw InvalidArgument("grid range: step must be > 0 and bounds finite");
    }
    if (stop < start) throw InvalidArgument("grid range: stop < start");
  }

  std::vector<double> values() const {
    validate();
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> v(count);
    // Snap to 12 decimals so 0.4 * k prints cleanly and -0 becomes 0.
    for (std::size_t k = 0; k < count; ++k) {
      v[k] = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12 + 0.0;
    }
    return v;
  }
};

struct GridSpec {
  GridRange theta1;
  GridRange theta2;
};

struct HeatmapCell {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double fitted_bias = 0.0;
  double bias_residual = 0.0;  // gradient of the total loss at fitted_bias
  double s_n = std::numeric_limits<double>::quiet_NaN();
  double t_n = std::numeric_limits<double>::quiet_NaN();
  bool reject = false;
  bool diverged = false;
};

/// Fits the bias for every (theta1, theta2) and audits the resulting logistic
/// model on `data`. Cells are row-major: theta1 outer, theta2 inner.
inline std::vector<HeatmapCell> sweep_heatmap(const Dataset& data, const GridSpec& grid, const FairMetric& metric,
                                              const AttackConfig& attack, double alpha, double delta,
                                              std::size_t threads = 1) {
  if (data.dim() != 2) throw DimensionError("sweep_heatmap: needs 2-D features");
  require_alpha(alpha);
  require_delta(delta);
  attack.validate();
  const auto t1 = grid.theta1.values();
  const auto t2 = grid.theta2.values();
  std::vector<HeatmapCell> cells(t1.size() * t2.size());
  parallel_for(cells.size(), threads, [&](std::size_t idx) {
    HeatmapCell& c = cells[idx];
    c.theta1 = t1[idx / t2.size()];
    c.theta2 = t2[idx % t2.size()];
    const Vector w{c.theta1, c.theta2};
    c.fitted_bias = fit_bias(data, w);
    c.bias_residual = bias_gradient(data, w, c.fitted_bias);
    const LogisticModel model(w, c.fitted_bias);
    try {
      const AuditReport rep = audit(model, metric, attack, data, alpha, delta);
      c.s_n = rep.ratio.mean;
      c.t_n = rep.t_n;
      c.reject = rep.reject;
    } catch (const DivergenceError&) {
      c.diverged = true;
    }
  });
  return cells;
}

// ---------------------------------------------------------------------------
// Stopping-time sweep.

struct StoppingPoint {
  double horizon = 0.0;
  double s_n = 0.0;
  double t_n = 0.0;
  bool reject = false;
};

/// T_n as a function of the attack horizon with every other setting fixed.
template <ProbabilisticClassifier Model>
std::vector<StoppingPoint> stopping_time_sweep(const Model& model, const FairMetric& metric, const Dataset& data,
                                               const AttackConfig& attack, const std::vector<double>& horizons,
                                               double alpha, double delta, std::size_t threads = 1) {
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (!(horizons[k] >= 0.0)) throw InvalidArgument("stopping_time_sweep: horizons must be >= 0");
    if (k > 0 && !(horizons[k] > horizons[k - 1])) {
      throw InvalidArgument("stopping_time_sweep: horizons must be increasing");
    }
  }
  std::vector<StoppingPoint> out;
  for (double h : horizons) {
    AttackConfig cfg = attack;
    cfg.horizon = h;
    const AuditReport rep = audit(model, metric, cfg, data, alpha, delta, {false, threads});
    out.push_back({h, rep.ratio.mean, rep.t_n, rep.reject});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metric perturbation ladder.

/// Seeded symmetric matrix with unit spectral norm.
inline Matrix unit_symmetric_perturbation(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix e(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j) e(i, j) = e(j, i) = normal(rng);
  const double nrm = spectral_norm_symmetric(e);
  if (!(nrm > 0.0)) throw InvalidArgument("unit_symmetric_perturbation: degenerate draw");
  return (1.0 / nrm) * e;
}

/// psd_floor(sigma + scale * direction); scale 0 returns sigma untouched.
inline Matrix perturbed_sigma(const Matrix& sigma, const Matrix& direction, double scale) {
  if (scale == 0.0) return sigma;
  Matrix m = sigma + scale * direction;
  m = 0.5 * (m + m.transposed());
  return psd_floor(m);
}

struct RobustnessPoint {
  double scale = 0.0;
  double sigma_gap = 0.0;  // |sigma_exact - sigma_mis|_2
  double delta_d = 0.0;    // 2 |sigma_exact - sigma_mis|_2
  double max_ratio_gap = 0.0;
  // Largest distance between the two end points and the bounding box of the
  // samples and every iterate, used for the perturbation-bound constants.
  double max_endpoint_gap = 0.0;
  Vector box_lo;
  Vector box_hi;
};

struct RobustnessOptions {
  std::uint64_t perturbation_seed = 0;
  std::size_t threads = 1;
};

template <ProbabilisticClassifier Model>
std::vector<RobustnessPoint> robustness_experiment(const Model& model, const FairMetric& metric_exact,
                                                   const std::vector<double>& scales, const Dataset& data,
                                                   const AttackConfig& attack, const RobustnessOptions& opts = {}) {
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] >= 0.0) || !std::isfinite(scales[k])) {
      throw InvalidArgument("robustness_experiment: scales must be finite and >= 0");
    }
    if (k > 0 && !(scales[k] < scales[k - 1])) {
      throw InvalidArgument("robustness_experiment: scales must be decreasing");
    }
  }
  require_same_dim(data.dim(), metric_exact.dim(), "robustness_experiment");
  const std::size_t d = data.dim();
  const Matrix direction = unit_symmetric_perturbation(d, opts.perturbation_seed);
  const auto steps = attack.step_sizes();

  // Exact-metric paths are shared by every scale.
  std::vector<AttackTrace> exact(data.size());
  parallel_for(data.size(), opts.threads, [&](std::size_t i) {
    detail::integrate(model, metric_exact, attack.lambda, steps, attack.divergence_radius, data.sample(i),
                      data.labels[i], &exact[i]);
  });

  std::vector<RobustnessPoint> out;
  for (double s : scales) {
    RobustnessPoint pt;
    pt.scale = s;
    const FairMetric mis(perturbed_sigma(metric_exact.sigma(), direction, s));
    pt.sigma_gap = spectral_norm_symmetric(metric_exact.sigma() - mis.sigma());
    pt.delta_d = 2.0 * pt.sigma_gap;
    std::vector<AttackTrace> other(data.size());
    parallel_for(data.size(), opts.threads, [&](std::size_t i) {
      detail::integrate(model, mis, attack.lambda, steps, attack.divergence_radius, data.sample(i), data.labels[i],
                        &other[i]);
    });
    pt.box_lo.assign(d, std::numeric_limits<double>::infinity());
    pt.box_hi.assign(d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double base = exact[i].losses.front();
      const double gap = std::abs(exact[i].losses.back() / base - other[i].losses.back() / base);
      pt.max_ratio_gap = std::max(pt.max_ratio_gap, gap);
      pt.max_endpoint_gap =
          std::max(pt.max_endpoint_gap, norm2(subtract(exact[i].iterates.back(), other[i].iterates.back())));
      for (const auto* tr : {&exact[i], &other[i]}) {
        for (const Vector& x : tr->iterates) {
          for (std::size_t k = 0; k < d; ++k) {
            pt.box_lo[k] = std::min(pt.box_lo[k], x[k]);
            pt.box_hi[k] = std::max(pt.box_hi[k], x[k]);
          }
        }
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

/// Constants of the perturbation bound sqrt(lambda delta_d / L) L0 D e^{LT} / c.
struct RobustnessConstants {
  double lambda = 0.0;
  double lipschitz_field = 0.0;  // L: Lipschitz constant of the attack field
  double lipschitz_loss = 0.0;   // L0
  double diameter = 0.0;         // D
  double loss_floor = 0.0;       // c
  double horizon = 0.0;          // T

  double bound(double delta_d) const {
    return std::sqrt(lambda * delta_d / lipschitz_field) * lipschitz_loss * diameter * std::exp(lipschitz_field * horizon) /
           loss_floor;
  }
};

/// Constants for a logistic model over the box [lo, hi]: the loss Hessian is
/// sigma(1 - sigma) w w^T, so L = |w|^2 / 4 + 2 lambda |Sigma|_2; L0 = |w|;
/// the loss is monotone in the logit, so its minimum over the box sits at a
/// corner.
inline RobustnessConstants logistic_robustness_constants(const LogisticModel& model, const FairMetric& metric,
                                                         double lambda, double horizon, ConstVecView box_lo,
                                                         ConstVecView box_hi) {
  const std::size_t d = model.input_dim();
  require_same_dim(box_lo.size(), d, "logistic_robustness_constants");
  require_same_dim(box_hi.size(), d, "logistic_robustness_constants");
  RobustnessConstants c;
  c.lambda = lambda;
  c.horizon = horizon;
  const double wn = norm2(model.weights);
  c.lipschitz_field = wn * wn / 4.0 + 2.0 * lambda * spectral_norm_symmetric(metric.sigma());
  c.lipschitz_loss = wn;
  c.diameter = norm2(subtract(box_hi, box_lo));
  // Extreme logits over the box, then the smaller of the two per-label minima.
  double zmin = model.bias, zmax = model.bias;
  for (std::size_t k = 0; k < d; ++k) {
    const double a = model.weights[k] * box_lo[k], b = model.weights[k] * box_hi[k];
    zmin += std::min(a, b);
    zmax += std::max(a, b);
  }
  c.loss_floor = std::min(clamped_logistic_loss(zmax, 1), clamped_logistic_loss(zmin, 0));
  return c;
}

// ---------------------------------------------------------------------------
// Group-fairness metrics.

/// Mean of per-class recalls.
inline double balanced_accuracy(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size()) throw DimensionError("balanced_accuracy: length mismatch");
  std::array<double, 2> hit{0, 0}, total{0, 0};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    require_label(y_true[i]);
    require_label(y_pred[i]);
    total[y_true[i]] += 1;
    if (y_pred[i] == y_true[i]) hit[y_true[i]] += 1;
  }
  if (total[0] == 0 || total[1] == 0) throw DataError("balanced_accuracy: both classes must be present");
  return 0.5 * (hit[0] / total[0] + hit[1] / total[1]);
}

/// 0.5 * [(TPR_1 - TPR_0) + (FPR_1 - FPR_0)], subscripts are the group.
inline double average_odds_difference(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                      const std::vector<int>& group) {
  if (y_true.size() != y_pred.size() || y_true.size() != group.size()) {
    throw DimensionError("average_odds_difference: length mismatch");
  }
  // [group][true label] -> count, positives predicted.
  double count[2][2] = {{0, 0}, {0, 0}}, pos[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    require_label(y_true[i]);
    require_label(y_pred[i]);
    if (group[i] != 0 && group[i] != 1) throw InvalidArgument("average_odds_difference: group must be 0 or 1");
    count[group[i]][y_true[i]] += 1;
    pos[group[i]][y_true[i]] += y_pred[i];
  }
  for (int g = 0; g < 2; ++g)
    for (int y = 0; y < 2; ++y)
      if (count[g][y] == 0) {
        throw DataError("average_odds_difference: empty stratum (group=" + std::to_string(g) +
                        ", label=" + std::to_string(y) + ")");
      }
  const double tpr_diff = pos[1][1] / count[1][1] - pos[0][1] / count[0][1];
  const double fpr_diff = pos[1][0] / count[1][0] - pos[0][0] / count[0][0];
  return 0.5 * (tpr_diff + fpr_diff);
}

// ---------------------------------------------------------------------------
// Monte-Carlo calibration.

/// Ratios tau - shape*scale + Gamma(shape, scale): a right-skewed population
/// with mean tau and sd sqrt(shape)*scale for every tau.
struct RatioPopulation {
  double mean = 1.25;
  double shape = 4.0;
  double scale = 0.05;

  double sd() const { return std::sqrt(shape) * scale; }

  void validate() const {
    if (!(shape > 0.0) || !(scale > 0.0)) throw InvalidArgument("ratio population: shape and scale must be > 0");
    if (!std::isfinite(mean)) throw InvalidArgument("ratio population: mean must be finite");
  }

  template <class Rng>
  std::vector<double> draw(Rng& rng, std::size_t n) const {
    std::gamma_distribution<double> gamma(shape, scale);
    std::vector<double> v(n);
    const double shift = mean - shape * scale;
    for (double& x : v) x = shift + gamma(rng);
    return v;
  }
};

/// Per-replicate seed; independent of scheduling.
inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t replicate) { return base + replicate; }

struct CalibrationSummary {
  std::string experiment;
  double tau = 0.0;            // true audit value (or theta1 for the simulation runs)
  double oracle_mean = 0.0;    // large-sample estimate of tau
  std::size_t replicates = 0;
  std::size_t n = 0;
  double rate = 0.0;           // coverage or rejection rate
  double binomial_se = 0.0;    // sqrt(p (1 - p) / replicates) at the nominal p
};

/// Mean of `draws` samples from the population, seeded separately from the replicates.
inline double oracle_mean(const RatioPopulation& pop, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(pop.shape, pop.scale);
  const double shift = pop.mean - pop.shape * pop.scale;
  // Kahan summation for the long oracle run.
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double yv = (shift + gamma(rng)) - comp;
    const double t = sum + yv;
    comp = (t - sum) - yv;
    sum = t;
  }
  return sum / static_cast<double>(draws);
}

/// Fraction of replicates whose two-sided CI covers the oracle mean.
inline CalibrationSummary coverage_experiment(const RatioPopulation& pop, std::size_t n, std::size_t replicates,
                                              double alpha, std::uint64_t seed, std::size_t oracle_draws = 1'000'000,
                                              std::size_t threads = 1) {
  pop.validate();
  require_alpha(alpha);
  if (n < 2 || replicates == 0) throw InvalidArgument("coverage_experiment: need n >= 2 and replicates > 0");
  CalibrationSummary s{"coverage", pop.mean, 0.0, replicates, n, 0.0, 0.0};
  s.oracle_mean = oracle_mean(pop, oracle_draws, seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  std::vector<char> hit(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    std::mt19937_64 rng(replicate_seed(seed, r));
    const auto ratios = pop.draw(rng, n);
    const Interval ci = two_sided_ci(ratios, alpha);
    hit[r] = ci.lo <= s.oracle_mean && s.oracle_mean <= ci.hi;
  });
  s.rate = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(replicates);
  s.binomial_se = std::sqrt((1.0 - alpha) * alpha / static_cast<double>(replicates));
  return s;
}

/// Rejection rate of the loss-ratio test at threshold delta.
inline CalibrationSummary rejection_experiment(const RatioPopulation& pop, std::size_t n, std::size_t replicates,
                                               double alpha, double delta, std::uint64_t seed,
                                               std::size_t threads = 1) {
  pop.validate();
  require_alpha(alpha);
  require_delta(delta);
  if (n < 2 || replicates == 0) throw InvalidArgument("rejection_experiment: need n >= 2 and replicates > 0");
  CalibrationSummary s{"rejection", pop.mean, pop.mean, replicates, n, 0.0, 0.0};
  std::vector<char> rej(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    std::mt19937_64 rng(replicate_seed(seed, r));
    rej[r] = loss_ratio_test(pop.draw(rng, n), alpha, delta).reject;
  });
  s.rate = static_cast<double>(std::count(rej.begin(), rej.end(), 1)) / static_cast<double>(replicates);
  s.binomial_se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(replicates));
  return s;
}

/// Rejection rate of the audit over fresh simulated datasets, for the logistic
/// model with slopes w and the bias refitted on each draw.
inline CalibrationSummary simulation_rejection_experiment(const SimConfig& base, const Vec2& w,
                                                          const FairMetric& metric, const AttackConfig& attack,
                                                          std::size_t replicates, double alpha, double delta,
                                                          std::size_t threads = 1) {
  base.validate();
  require_alpha(alpha);
  require_delta(delta);
  if (replicates == 0) throw InvalidArgument("simulation_rejection_experiment: replicates must be > 0");
  CalibrationSummary s{"simulation", w[0], std::numeric_limits<double>::quiet_NaN(), replicates, base.n_samples,
                       0.0, 0.0};
  std::vector<char> rej(replicates, 0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    SimConfig cfg = base;
    cfg.seed = replicate_seed(base.seed, r);
    const Dataset data = generate(cfg);
    const Vector wv{w[0], w[1]};
    const LogisticModel model(wv, fit_bias(data, wv));
    rej[r] = audit(model, metric, attack, data, alpha, delta).reject;
  });
  s.rate = static_cast<double>(std::count(rej.begin(), rej.end(), 1)) / static_cast<double>(replicates);
  s.binomial_se = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(replicates));
  return s;
}

}  // namespace fairflow
