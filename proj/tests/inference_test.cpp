#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fairflow/inference.hpp"
#include "fairflow/sim.hpp"

using namespace fairflow;

namespace {

// Maclaurin series of erf, accurate to ~1e-16 for |x| < 3.
double erf_series(double x) {
  double term = x, sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x * x / n;
    sum += term / (2 * n + 1);
  }
  return 2.0 / std::sqrt(std::numbers::pi) * sum;
}

double quantile_by_bisection(double p) {
  double lo = -6, hi = 6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * (1.0 + erf_series(mid / std::numbers::sqrt2)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(NormalQuantile, Examples) {
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(0.95), 1.645, 5e-4);
  EXPECT_NEAR(normal_quantile(0.975), quantile_by_bisection(0.975), 1e-12);
  EXPECT_NEAR(normal_quantile(0.975), 1.959964, 1e-5);
  EXPECT_NEAR(normal_quantile(0.95), quantile_by_bisection(0.95), 1e-12);
}

TEST(NormalQuantile, InvertsCdf) {
  for (double lp = -6; lp <= -0.3; lp += 0.05) {
    const double p = std::pow(10.0, lp);
    EXPECT_LT(std::abs(normal_cdf(normal_quantile(p)) - p), 1e-9);
    EXPECT_LT(std::abs(normal_cdf(normal_quantile(1.0 - p)) - (1.0 - p)), 1e-9);
  }
  EXPECT_THROW(normal_quantile(0.0), InvalidArgument);
  EXPECT_THROW(normal_quantile(1.0), InvalidArgument);
}

TEST(RatioStats, Examples) {
  const auto ones = loss_ratio_stats(std::vector<double>(7, 1.0));
  EXPECT_EQ(ones.mean, 1.0);
  EXPECT_EQ(ones.sd, 0.0);
  const auto s = loss_ratio_stats(std::vector<double>{1, 2, 3});
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.sd, 1.0);
}

TEST(RatioStats, ShiftInvariance) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> dist;
  std::vector<double> r(50), shifted(50);
  for (std::size_t i = 0; i < 50; ++i) {
    r[i] = dist(rng);
    shifted[i] = r[i] + 3.5;
  }
  const auto a = loss_ratio_stats(r), b = loss_ratio_stats(shifted);
  EXPECT_NEAR(b.mean, a.mean + 3.5, 1e-12);
  EXPECT_NEAR(b.sd, a.sd, 1e-12);
}

TEST(RatioStats, RejectsBadInput) {
  EXPECT_THROW(loss_ratio_stats(std::vector<double>{1.0}), InvalidArgument);
  EXPECT_THROW(loss_ratio_stats(std::vector<double>{1.0, NAN}), InvalidArgument);
}

TEST(TwoSidedCi, Examples) {
  const Interval deg = two_sided_ci(std::vector<double>(5, 1.3), 0.05);
  EXPECT_EQ(deg.lo, 1.3);
  EXPECT_EQ(deg.hi, 1.3);
  const Interval ci = two_sided_ci(std::vector<double>{1, 2, 3}, 0.05);
  const double half = quantile_by_bisection(0.975) / std::sqrt(3.0);
  EXPECT_NEAR(ci.lo, 2.0 - half, 1e-10);
  EXPECT_NEAR(ci.hi, 2.0 + half, 1e-10);
  EXPECT_NEAR(ci.lo, 0.86843, 1e-4);
  EXPECT_NEAR(ci.hi, 3.13157, 1e-4);
}

TEST(TwoSidedCi, WidthScalesAsRootN) {
  std::mt19937_64 rng(2);
  std::gamma_distribution<double> g(2.0, 0.3);
  std::vector<double> r(40);
  for (double& v : r) v = 1.0 + g(rng);
  std::vector<double> r4;
  for (int k = 0; k < 4; ++k) r4.insert(r4.end(), r.begin(), r.end());
  const Interval a = two_sided_ci(r, 0.05), b = two_sided_ci(r4, 0.05);
  EXPECT_NEAR((b.hi - b.lo) / (a.hi - a.lo), 0.5, 0.01);
}

TEST(LossRatioTest, Examples) {
  const TestResult ones = loss_ratio_test(std::vector<double>(10, 1.0), 0.05, 1.25);
  EXPECT_EQ(ones.statistic, 1.0);
  EXPECT_FALSE(ones.reject);
  const TestResult t = loss_ratio_test(std::vector<double>{1, 2, 3}, 0.05, 1.25);
  EXPECT_NEAR(t.statistic, 2.0 - quantile_by_bisection(0.95) / std::sqrt(3.0), 1e-10);
  EXPECT_NEAR(t.statistic, 1.05030, 1e-4);
  EXPECT_FALSE(t.reject);
}

TEST(LossRatioTest, ReportedBaselineStatisticRejects) {
  // A statistic of 3.676 against delta = 1.25 is a rejection.
  const RatioStats s{100, 3.676, 0.0};
  EXPECT_TRUE(loss_ratio_test(s, 0.05, 1.25).reject);
}

TEST(LossRatioTest, LowerBoundBelowMean) {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(2.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> r(20);
    for (double& v : r) v = 1.0 + e(rng);
    const RatioStats s = loss_ratio_stats(r);
    for (double alpha : {0.01, 0.05, 0.2, 0.5}) {
      EXPECT_LE(loss_ratio_test(s, alpha, 1.25).statistic, s.mean);
      EXPECT_EQ(one_sided_lower_bound(s, alpha), loss_ratio_test(s, alpha, 1.25).statistic);
    }
  }
}

TEST(LossRatioTest, ArgumentChecks) {
  const std::vector<double> r{1, 2, 3};
  EXPECT_THROW(loss_ratio_test(r, 0.0, 1.25), InvalidArgument);
  EXPECT_THROW(loss_ratio_test(r, 0.6, 1.25), InvalidArgument);
  EXPECT_THROW(loss_ratio_test(r, 0.05, 1.0), InvalidArgument);
}

TEST(ErrorRates, HandArithmetic) {
  const std::vector<int> post{1, 1, 0, 1}, pre{1, 0, 0, 1};
  const ErrorRateStats s = error_rate_stats(post, pre);
  EXPECT_DOUBLE_EQ(s.a_n, 0.75);
  EXPECT_DOUBLE_EQ(s.b_n, 0.5);
  EXPECT_DOUBLE_EQ(s.s_tilde, 1.5);
  EXPECT_DOUBLE_EQ(s.v11, 0.75);
  EXPECT_DOUBLE_EQ(s.v22, 0.5);
  EXPECT_DOUBLE_EQ(s.v12, 0.5);
  EXPECT_DOUBLE_EQ(s.delta_numerator(), 0.09375);
  EXPECT_DOUBLE_EQ(s.var_hat, 0.375);
  const TestResult t = error_rate_test(s, 0.05, 1.25);
  EXPECT_NEAR(t.statistic, 1.5 - quantile_by_bisection(0.95) * std::sqrt(0.375), 1e-10);
  EXPECT_NEAR(t.statistic, 0.49276, 1e-4);
  EXPECT_FALSE(t.reject);
}

TEST(ErrorRates, IdenticalColumns) {
  const std::vector<int> z{1, 0, 1, 1, 0, 0, 1};
  const ErrorRateStats s = error_rate_stats(z, z);
  EXPECT_EQ(s.s_tilde, 1.0);
  EXPECT_EQ(s.var_hat, 0.0);
  const TestResult t = error_rate_test(s, 0.05, 1.25);
  EXPECT_EQ(t.statistic, 1.0);
  EXPECT_FALSE(t.reject);
}

TEST(ErrorRates, ReportedBaselineStatisticRejects) {
  ErrorRateStats s;
  s.s_tilde = 2.262;
  EXPECT_TRUE(error_rate_test(s, 0.05, 1.25).reject);
}

TEST(ErrorRates, PermutationInvariant) {
  std::vector<int> post{1, 1, 0, 1, 0, 1, 1, 0}, pre{1, 0, 0, 1, 1, 0, 1, 0};
  const ErrorRateStats a = error_rate_stats(post, pre);
  std::vector<std::size_t> idx{7, 2, 5, 0, 3, 6, 1, 4};
  std::vector<int> pp, qq;
  for (auto i : idx) {
    pp.push_back(post[i]);
    qq.push_back(pre[i]);
  }
  const ErrorRateStats b = error_rate_stats(pp, qq);
  EXPECT_EQ(a.s_tilde, b.s_tilde);
  EXPECT_EQ(a.var_hat, b.var_hat);
}

TEST(ErrorRates, NoBaselineErrorsIsTyped) {
  EXPECT_THROW(error_rate_stats(std::vector<int>{1, 0}, std::vector<int>{0, 0}), NoBaselineErrors);
}

TEST(ErrorRates, UncenteredEqualsCentered) {
  std::mt19937_64 rng(77);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> post(30), pre(30);
    for (std::size_t i = 0; i < 30; ++i) {
      post[i] = coin(rng);
      pre[i] = coin(rng);
    }
    pre[0] = 1;
    const ErrorRateStats s = error_rate_stats(post, pre);
    double c11 = 0, c22 = 0, c12 = 0;
    for (std::size_t i = 0; i < 30; ++i) {
      c11 += (post[i] - s.a_n) * (post[i] - s.a_n);
      c22 += (pre[i] - s.b_n) * (pre[i] - s.b_n);
      c12 += (post[i] - s.a_n) * (pre[i] - s.b_n);
    }
    c11 /= 30;
    c22 /= 30;
    c12 /= 30;
    const double centered = s.a_n * s.a_n * c22 + s.b_n * s.b_n * c11 - 2 * s.a_n * s.b_n * c12;
    EXPECT_NEAR(s.delta_numerator(), centered, 1e-12);
  }
}

TEST(Audit, ConstantModel) {
  const Dataset data = generate(SimConfig{});
  const LogisticModel m(Vector{0, 0}, 0.4);
  const AuditReport rep = audit(m, rotated_coordinate_metric(0.0), AttackConfig::audit_preset(), data, 0.05, 1.01);
  EXPECT_EQ(rep.ratio.mean, 1.0);
  EXPECT_EQ(rep.ratio.sd, 0.0);
  EXPECT_FALSE(rep.reject);
  EXPECT_EQ(rep.n, data.size());
}

TEST(Audit, ThreadCountDoesNotChangeResults) {
  SimConfig sc;
  sc.n_samples = 120;
  const Dataset data = generate(sc);
  const Vector w{2.0, 1.0};
  const LogisticModel m(w, fit_bias(data, w));
  const auto metric = rotated_coordinate_metric(0.0);
  const auto a = audit(m, metric, AttackConfig::sim_preset(), data, 0.05, 1.25, {false, 1});
  const auto b = audit(m, metric, AttackConfig::sim_preset(), data, 0.05, 1.25, {false, 4});
  EXPECT_EQ(a.t_n, b.t_n);
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples[i].ratio, b.samples[i].ratio);
}

TEST(Audit, DivergenceNamesSample) {
  SimConfig sc;
  sc.n_samples = 20;
  const Dataset data = generate(sc);
  const LogisticModel m(Vector{1.0, 1.0}, 0.0);
  AttackConfig bad;
  bad.lambda = 100.0;
  bad.schedule = StepSchedule::constant(0.5);
  bad.num_steps = 200;
  try {
    audit(m, FairMetric::euclidean(2), bad, data, 0.05, 1.25);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("sample 0"), std::string::npos) << e.what();
  }
  // With skipping, divergent samples are excluded instead.
  EXPECT_THROW(audit(m, FairMetric::euclidean(2), bad, data, 0.05, 1.25, {true, 1}), InvalidArgument);
}

TEST(Audit, SimulationRejectionRates) {
  const auto metric = rotated_coordinate_metric(0.0);
  const auto attack = AttackConfig::sim_preset();
  SimConfig base;
  base.seed = 1000;
  const auto fair = simulation_rejection_experiment(base, {0.0, 0.0}, metric, attack, 100, 0.05, 1.25, 2);
  EXPECT_LE(fair.rate, 0.05);
  const auto unfair = simulation_rejection_experiment(base, {4.0, 0.0}, metric, attack, 100, 0.05, 1.25, 2);
  EXPECT_GE(unfair.rate, 0.95);
}
