#include "streamgp/metrics.hpp"

#include <cmath>
#include <numbers>

namespace streamgp {

Metrics compute_metrics(const PredictiveMarginals& pred,
                        const Eigen::Ref<const Vector>& y_true) {
  const Index n = y_true.size();
  require(n >= 1, "metrics need at least one test point");
  require(pred.mean.size() == n && pred.observed_var.size() == n,
          "prediction and target lengths differ");
  require((pred.observed_var.array() > 0.0).all(),
          "observed predictive variance must be positive");

  Metrics m;
  double ll = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double r = y_true[i] - pred.mean[i];
    const double v = pred.observed_var[i];
    ll += -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * r * r / v;
  }
  m.mll = ll / static_cast<double>(n);
  m.rmse = std::sqrt((y_true - pred.mean).squaredNorm() / static_cast<double>(n));
  return m;
}

}  // namespace streamgp
