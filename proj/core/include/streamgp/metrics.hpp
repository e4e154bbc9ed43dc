#pragma once

#include "streamgp/types.hpp"

namespace streamgp {

struct Metrics {
  double mll = 0.0;   // mean per-point log density of y under N(mean, observed_var)
  double rmse = 0.0;
};

Metrics compute_metrics(const PredictiveMarginals& pred,
                        const Eigen::Ref<const Vector>& y_true);

}  // namespace streamgp
