#pragma once

// Audit statistics. Two tests share the same machinery:
//  * loss-ratio test: mean of per-sample ratios loss(Phi(x))/loss(x), with a
//    one-sided lower confidence bound T_n = S_n - z_{1-a} V_n / sqrt(n);
//  * error-rates-ratio test: ratio of mean 0-1 losses after/before the attack,
//    with a delta-method standard error.
// Both reject "the model is individually fair" when the lower bound exceeds delta.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairflow/attack.hpp"
#include "fairflow/dataset.hpp"
#include "fairflow/error.hpp"
#include "fairflow/fair_metric.hpp"
#include "fairflow/models.hpp"
#include "fairflow/parallel.hpp"

namespace fairflow {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

/// Standard normal quantile. Acklam's rational approximation (relative error
/// about 1e-9) polished with two Halley steps against the erfc-based CDF.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile: p must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p == 0.5) return 0.0;
  for (int i = 0; i < 2; ++i) {
    // Work with the smaller tail to keep the residual accurate.
    const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Loss-ratio statistics

struct RatioStats {
  std::size_t n = 0;
  double mean = 0.0;  // S_n
  double sd = 0.0;    // V_n, n - 1 denominator
};

inline RatioStats loss_ratio_stats(std::span<const double> ratios) {
  if (ratios.size() < 2) throw InvalidArgument("loss_ratio_stats: need at least 2 ratios");
  RatioStats s;
  s.n = ratios.size();
  for (double r : ratios) {
    if (!std::isfinite(r)) throw InvalidArgument("loss_ratio_stats: non-finite ratio");
    s.mean += r;
  }
  s.mean /= static_cast<double>(s.n);
  double ss = 0.0;
  for (double r : ratios) ss += (r - s.mean) * (r - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw InvalidArgument("alpha must lie in (0, 0.5]");
}

inline void require_delta(double delta) {
  if (!(delta > 1.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be > 1");
}

inline Interval two_sided_ci(const RatioStats& s, double alpha) {
  require_alpha(alpha);
  const double half = normal_quantile(1.0 - alpha / 2.0) * s.sd / std::sqrt(static_cast<double>(s.n));
  return {s.mean - half, s.mean + half};
}

inline Interval two_sided_ci(std::span<const double> ratios, double alpha) {
  return two_sided_ci(loss_ratio_stats(ratios), alpha);
}

/// Lower end of the one-sided (1 - alpha) interval; this is also T_n.
inline double one_sided_lower_bound(const RatioStats& s, double alpha) {
  require_alpha(alpha);
  return s.mean - normal_quantile(1.0 - alpha) * s.sd / std::sqrt(static_cast<double>(s.n));
}

struct TestResult {
  double statistic = 0.0;
  bool reject = false;
};

inline TestResult loss_ratio_test(const RatioStats& s, double alpha, double delta) {
  require_delta(delta);
  const double t = one_sided_lower_bound(s, alpha);
  return {t, t > delta};
}

inline TestResult loss_ratio_test(std::span<const double> ratios, double alpha, double delta) {
  return loss_ratio_test(loss_ratio_stats(ratios), alpha, delta);
}

// ---------------------------------------------------------------------------
// Error-rates-ratio statistics

struct ErrorRateStats {
  std::size_t n = 0;
  double a_n = 0.0;      // mean 0-1 loss after the attack
  double b_n = 0.0;      // mean 0-1 loss on the originals
  double s_tilde = 0.0;  // a_n / b_n
  // Uncentered second moments (1/n) of (post, pre).
  double v11 = 0.0, v22 = 0.0, v12 = 0.0;
  double var_hat = 0.0;  // delta-method variance of s_tilde

  /// A^2 V22 + B^2 V11 - 2 A B V12. Centering V about (A, B) leaves this
  /// unchanged because the cross terms cancel.
  double delta_numerator() const { return a_n * a_n * v22 + b_n * b_n * v11 - 2.0 * a_n * b_n * v12; }
};

inline ErrorRateStats error_rate_stats(std::span<const int> post, std::span<const int> pre) {
  require_same_dim(post.size(), pre.size(), "error_rate_stats");
  if (post.size() < 2) throw InvalidArgument("error_rate_stats: need at least 2 samples");
  ErrorRateStats s;
  s.n = post.size();
  const double n = static_cast<double>(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    if ((post[i] != 0 && post[i] != 1) || (pre[i] != 0 && pre[i] != 1)) {
      throw InvalidArgument("error_rate_stats: 0-1 losses must be 0 or 1");
    }
    s.a_n += post[i];
    s.b_n += pre[i];
    s.v11 += post[i] * post[i];
    s.v22 += pre[i] * pre[i];
    s.v12 += post[i] * pre[i];
  }
  s.a_n /= n;
  s.b_n /= n;
  s.v11 /= n;
  s.v22 /= n;
  s.v12 /= n;
  if (s.b_n == 0.0) throw NoBaselineErrors();
  s.s_tilde = s.a_n / s.b_n;
  const double b4 = s.b_n * s.b_n * s.b_n * s.b_n;
  s.var_hat = std::max(0.0, s.delta_numerator()) / (n * b4);
  return s;
}

inline TestResult error_rate_test(const ErrorRateStats& s, double alpha, double delta) {
  require_alpha(alpha);
  require_delta(delta);
  const double t = s.s_tilde - normal_quantile(1.0 - alpha) * std::sqrt(s.var_hat);
  return {t, t > delta};
}

inline TestResult error_rate_test(std::span<const int> post, std::span<const int> pre, double alpha,
                                  double delta) {
  return error_rate_test(error_rate_stats(post, pre), alpha, delta);
}

// ---------------------------------------------------------------------------
// Full audit

struct SampleOutcome {
  std::size_t index = 0;
  double ratio = 1.0;
  int pre01 = 0;
  int post01 = 0;
  bool diverged = false;
  std::size_t divergence_step = 0;
};

struct ErrorRateBlock {
  ErrorRateStats stats;
  double t_tilde = 0.0;
  bool reject = false;
};

struct AuditReport {
  std::size_t n = 0;
  RatioStats ratio;
  double t_n = 0.0;
  Interval ci_two_sided;
  double ci_one_sided_lo = 0.0;
  double alpha = 0.05;
  double delta = 1.25;
  bool reject = false;
  std::optional<ErrorRateBlock> error_rate;
  std::string error_rate_note;  // why error_rate is absent
  std::vector<std::size_t> excluded;  // divergent samples dropped under skip_divergent
  std::vector<SampleOutcome> samples;
  AttackConfig attack;
  double horizon = 0.0;
};

struct AuditOptions {
  bool skip_divergent = false;
  std::size_t threads = 1;
};

/// Builds the report from per-sample outcomes (divergent ones already removed).
inline AuditReport summarize_audit(std::vector<SampleOutcome> outcomes, double alpha, double delta) {
  require_alpha(alpha);
  require_delta(delta);
  AuditReport rep;
  rep.alpha = alpha;
  rep.delta = delta;
  std::vector<double> ratios;
  std::vector<int> pre, post;
  for (const auto& o : outcomes) {
    if (o.diverged) {
      rep.excluded.push_back(o.index);
      continue;
    }
    ratios.push_back(o.ratio);
    pre.push_back(o.pre01);
    post.push_back(o.post01);
  }
  rep.n = ratios.size();
  rep.ratio = loss_ratio_stats(ratios);
  const TestResult t = loss_ratio_test(rep.ratio, alpha, delta);
  rep.t_n = t.statistic;
  rep.reject = t.reject;
  rep.ci_one_sided_lo = t.statistic;
  rep.ci_two_sided = two_sided_ci(rep.ratio, alpha);
  try {
    ErrorRateBlock blk;
    blk.stats = error_rate_stats(post, pre);
    const TestResult tt = error_rate_test(blk.stats, alpha, delta);
    blk.t_tilde = tt.statistic;
    blk.reject = tt.reject;
    rep.error_rate = blk;
  } catch (const NoBaselineErrors& e) {
    rep.error_rate_note = e.what();
  }
  rep.samples = std::move(outcomes);
  return rep;
}

/// Runs the attack on every sample and computes both tests. The model is
/// assumed to be independent of `data` (e.g. fitted on a disjoint split).
template <ProbabilisticClassifier Model>
AuditReport audit(const Model& model, const FairMetric& metric, const AttackConfig& cfg, const Dataset& data,
                  double alpha, double delta, const AuditOptions& opts = {}) {
  require_alpha(alpha);
  require_delta(delta);
  require_same_dim(data.dim(), model.input_dim(), "audit: model vs data");
  require_same_dim(data.dim(), metric.dim(), "audit: metric vs data");
  const auto steps = cfg.step_sizes();
  std::vector<SampleOutcome> out(data.size());
  parallel_for(data.size(), opts.threads, [&](std::size_t i) {
    SampleOutcome& o = out[i];
    o.index = i;
    const auto x0 = data.sample(i);
    const int y = data.labels[i];
    o.pre01 = model.predict(x0) != y ? 1 : 0;
    try {
      const Vector end = unfair_map(model, metric, cfg, steps, x0, y);
      o.ratio = model.loss(end, y) / model.loss(x0, y);
      o.post01 = model.predict(end) != y ? 1 : 0;
    } catch (const DivergenceError& e) {
      o.diverged = true;
      o.divergence_step = e.step();
    }
  });
  if (!opts.skip_divergent) {
    for (const auto& o : out)
      if (o.diverged) throw DivergenceError(o.divergence_step, "sample " + std::to_string(o.index));
  }
  AuditReport rep = summarize_audit(std::move(out), alpha, delta);
  rep.attack = cfg;
  for (double eta : steps) rep.horizon += eta;
  return rep;
}

}  // namespace fairflow
