#pragma once

// Gradient-flow attack. Starting at an audit point x0 with label y, integrate
//
//   dx/dt = grad_x { loss(f(x), y) - lambda * d^2(x, x0) }
//
// with forward Euler and return the end point (the "unfair map"). The statistic
// built on top of it is defined by this exact integrator, so there is no line
// search or adaptive stepping here.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/error.hpp"
#include "fairflow/fair_metric.hpp"
#include "fairflow/linalg.hpp"
#include "fairflow/models.hpp"

namespace fairflow {

struct StepSchedule {
  enum class Kind { constant, decay };
  Kind kind = Kind::constant;
  double scale = 0.01;     // eta for constant; c for decay
  double exponent = 0.0;   // p in c / k^p (decay only)

  static StepSchedule constant(double eta) { return {Kind::constant, eta, 0.0}; }
  static StepSchedule decay(double c, double p) { return {Kind::decay, c, p}; }

  /// Step size of the k-th Euler step, k >= 1.
  double step(std::size_t k) const {
    if (kind == Kind::constant) return scale;
    return scale / std::pow(static_cast<double>(k), exponent);
  }

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("step schedule: scale must be > 0");
    if (kind == Kind::decay && (!(exponent >= 0.0) || !std::isfinite(exponent))) {
      throw InvalidArgument("step schedule: decay exponent must be >= 0");
    }
  }
};

struct AttackConfig {
  double lambda = 50.0;
  StepSchedule schedule = StepSchedule::constant(0.01);
  std::size_t num_steps = 500;
  // When set, steps are taken until their sum reaches the horizon exactly (the
  // last step is shortened); num_steps is ignored.
  std::optional<double> horizon;
  double divergence_radius = 1e6;

  /// Settings used for auditing trained networks on tabular data.
  static AttackConfig audit_preset() { return {50.0, StepSchedule::constant(0.01), 500, std::nullopt, 1e6}; }

  /// Settings used for the two-dimensional simulation study.
  static AttackConfig sim_preset() {
    return {100.0, StepSchedule::decay(0.02, 2.0 / 3.0), 400, std::nullopt, 1e6};
  }

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("attack: lambda must be > 0");
    schedule.validate();
    if (horizon && (!(*horizon >= 0.0) || !std::isfinite(*horizon))) {
      throw InvalidArgument("attack: horizon must be >= 0");
    }
    if (!(divergence_radius > 0.0)) throw InvalidArgument("attack: divergence radius must be > 0");
  }

  /// Materialized step sizes eta_1..eta_N.
  std::vector<double> step_sizes() const {
    validate();
    std::vector<double> out;
    if (!horizon) {
      out.reserve(num_steps);
      for (std::size_t k = 1; k <= num_steps; ++k) out.push_back(schedule.step(k));
      return out;
    }
    constexpr std::size_t kMaxSteps = 50'000'000;
    double t = 0.0;
    const double target = *horizon;
    for (std::size_t k = 1; t < target; ++k) {
      if (k > kMaxSteps) throw InvalidArgument("attack: horizon needs more than 5e7 steps");
      const double eta = schedule.step(k);
      // Absorb a sliver below the last full step into that step.
      if (t + eta >= target * (1.0 - 1e-12)) {
        out.push_back(target - t);
        break;
      }
      out.push_back(eta);
      t += eta;
    }
    return out;
  }

  /// T = sum of the step sizes.
  double effective_horizon() const {
    double t = 0.0;
    for (double eta : step_sizes()) t += eta;
    return t;
  }
};

struct AttackTrace {
  std::vector<Vector> iterates;  // x^(0) .. x^(N)
  std::vector<double> losses;
  std::vector<double> penalties;  // d^2(x^(k), x0)
  std::vector<double> step_sizes;
  double horizon = 0.0;
};

/// g(x) = grad loss(x, y) - lambda * grad_x d^2(x, x0).
template <DifferentiableLoss Model>
Vector flow_field(const Model& model, const FairMetric& metric, double lambda, ConstVecView x,
                  ConstVecView x0, int y) {
  Vector g = model.input_gradient(x, y);
  if (lambda != 0.0) axpy(-lambda, metric.distance_sq_gradient(x, x0), g);
  return g;
}

namespace detail {

template <DifferentiableLoss Model>
Vector integrate(const Model& model, const FairMetric& metric, double lambda,
                 std::span<const double> steps, double radius, ConstVecView x0, int y,
                 AttackTrace* trace) {
  require_same_dim(x0.size(), model.input_dim(), "unfair_map");
  require_same_dim(x0.size(), metric.dim(), "unfair_map");
  if (!all_finite(x0)) throw InvalidArgument("unfair_map: non-finite start point");
  require_label(y);
  Vector x(x0.begin(), x0.end());
  if (trace) {
    trace->iterates.assign(1, x);
    trace->losses.assign(1, model.loss(x, y));
    trace->penalties.assign(1, 0.0);
    trace->step_sizes.assign(steps.begin(), steps.end());
    trace->horizon = 0.0;
    for (double eta : steps) trace->horizon += eta;
  }
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const Vector g = flow_field(model, metric, lambda, x, x0, y);
    axpy(steps[k], g, x);
    if (!all_finite(x)) throw DivergenceError(k + 1, "non-finite iterate");
    const double dist = norm2(subtract(x, x0));
    if (dist > radius) {
      throw DivergenceError(k + 1, "iterate left the divergence radius (|x - x0| = " + std::to_string(dist) + ")");
    }
    if (trace) {
      trace->iterates.push_back(x);
      trace->losses.push_back(model.loss(x, y));
      trace->penalties.push_back(metric.distance_sq(x, x0));
    }
  }
  return x;
}

}  // namespace detail

/// End point of the forward Euler attack started at x0.
template <DifferentiableLoss Model>
Vector unfair_map(const Model& model, const FairMetric& metric, const AttackConfig& cfg, ConstVecView x0,
                  int y) {
  const auto steps = cfg.step_sizes();
  return detail::integrate(model, metric, cfg.lambda, steps, cfg.divergence_radius, x0, y, nullptr);
}

/// Precomputed step sizes; lets batch callers avoid rebuilding the schedule per sample.
template <DifferentiableLoss Model>
Vector unfair_map(const Model& model, const FairMetric& metric, const AttackConfig& cfg,
                  std::span<const double> steps, ConstVecView x0, int y) {
  return detail::integrate(model, metric, cfg.lambda, steps, cfg.divergence_radius, x0, y, nullptr);
}

template <DifferentiableLoss Model>
std::pair<Vector, AttackTrace> unfair_map_traced(const Model& model, const FairMetric& metric,
                                                 const AttackConfig& cfg, ConstVecView x0, int y) {
  AttackTrace trace;
  const auto steps = cfg.step_sizes();
  Vector x = detail::integrate(model, metric, cfg.lambda, steps, cfg.divergence_radius, x0, y, &trace);
  return {std::move(x), std::move(trace)};
}

/// loss(Phi(x0)) / loss(x0).
template <DifferentiableLoss Model>
double loss_ratio(const Model& model, const FairMetric& metric, const AttackConfig& cfg, ConstVecView x0,
                  int y) {
  const Vector end = unfair_map(model, metric, cfg, x0, y);
  return model.loss(end, y) / model.loss(x0, y);
}

// ---------------------------------------------------------------------------
// Euler accuracy on problems with a closed-form flow.

/// dx/dt = rate .* x + offset, componentwise; exact solution is known.
struct DiagonalLinearFlow {
  Vector rate;
  Vector offset;
  Vector start;

  std::size_t dim() const { return start.size(); }

  Vector field(ConstVecView x) const {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = rate[i] * x[i] + offset[i];
    return g;
  }

  Vector exact(double t) const {
    Vector x(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      if (rate[i] == 0.0) {
        x[i] = start[i] + offset[i] * t;
      } else {
        const double fixed = -offset[i] / rate[i];
        x[i] = fixed + (start[i] - fixed) * std::exp(rate[i] * t);
      }
    }
    return x;
  }

  /// Lipschitz constant of the field: max |rate_i|.
  double lipschitz() const {
    double l = 0.0;
    for (double r : rate) l = std::max(l, std::abs(r));
    return l;
  }

  /// sup over the exact path on [0, T] of |J g(X(t))|_inf. Here J g = rate .* dX/dt,
  /// and each component of dX/dt is monotone in t, so the sup sits at an end point.
  double curvature_bound(double horizon) const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
      const double v0 = std::abs(rate[i] * (rate[i] * start[i] + offset[i]));
      m = std::max(m, v0 * std::max(1.0, std::exp(rate[i] * horizon)));
    }
    return m;
  }
};

struct StabilityProbe {
  double lipschitz_L = 1.0;
  double curvature_m = 1.0;
  std::size_t dim_d = 1;
  double max_step_h = 0.1;

  /// h m sqrt(d) / (2L) * (e^{L T} - 1); the L -> 0 limit is h m sqrt(d) T / 2.
  double bound(double horizon) const {
    const double c = max_step_h * curvature_m * std::sqrt(static_cast<double>(dim_d)) / 2.0;
    if (lipschitz_L == 0.0) return c * horizon;
    return c / lipschitz_L * std::expm1(lipschitz_L * horizon);
  }
};

struct StabilityReport {
  double gap = 0.0;  // max_k |X(t_k) - x^(k)|_2
  double bound = 0.0;
  double horizon = 0.0;
  StabilityProbe probe;

  bool within_bound() const { return gap <= bound; }
};

inline StabilityProbe probe_for(const DiagonalLinearFlow& problem, std::span<const double> steps) {
  double h = 0.0, horizon = 0.0;
  for (double eta : steps) {
    h = std::max(h, eta);
    horizon += eta;
  }
  return {problem.lipschitz(), problem.curvature_bound(horizon), problem.dim(), h};
}

/// Runs Euler on the problem and compares every iterate with the exact flow.
inline StabilityReport stability_gap(const StabilityProbe& probe, const DiagonalLinearFlow& problem,
                                     std::span<const double> steps) {
  for (double eta : steps)
    if (!(eta > 0.0)) throw InvalidArgument("stability_gap: step sizes must be > 0");
  StabilityReport rep;
  rep.probe = probe;
  Vector x = problem.start;
  double t = 0.0;
  for (double eta : steps) {
    const Vector g = problem.field(x);
    axpy(eta, g, x);
    t += eta;
    rep.gap = std::max(rep.gap, norm2(subtract(problem.exact(t), x)));
  }
  rep.horizon = t;
  rep.bound = probe.bound(t);
  return rep;
}

inline StabilityReport stability_gap(const DiagonalLinearFlow& problem, std::span<const double> steps) {
  return stability_gap(probe_for(problem, steps), problem, steps);
}

}  // namespace fairflow
