// Audits two logistic models on the synthetic two-group data: one that only
// looks at the fair coordinate and one that leans on the group coordinate.

#include <cstdio>

#include "fairflow/fairflow.hpp"

int main() {
  using namespace fairflow;
  const Dataset data = generate(SimConfig{});
  const FairMetric metric = rotated_coordinate_metric(0.0);
  const AttackConfig attack = AttackConfig::sim_preset();

  for (const Vector& w : {Vector{0.0, 2.0}, Vector{4.0, 0.0}}) {
    const LogisticModel model(w, fit_bias(data, w));
    const AuditReport rep = audit(model, metric, attack, data, 0.05, 1.25);
    std::printf("theta = (%.1f, %.1f)  S_n = %.4f  T_n = %.4f  95%% CI [%.4f, %.4f]  %s\n", w[0], w[1],
                rep.ratio.mean, rep.t_n, rep.ci_two_sided.lo, rep.ci_two_sided.hi,
                rep.reject ? "reject" : "fail to reject");
  }
}
