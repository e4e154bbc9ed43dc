#pragma once

#include "streamgp/kernel.hpp"
#include "streamgp/types.hpp"

namespace streamgp {

/// Sparse GP posterior q(u) = N(q_mean, q_cov) over function values at the
/// pseudo-inputs Z, fit under `theta`.
struct BatchSgpModel {
  Matrix Z;        // M x D pseudo-inputs
  Hyperparams theta;
  Vector q_mean;   // M
  Matrix q_cov;    // M x M, symmetric positive definite
};

/// Collapsed variational lower bound on log p(y | theta) for pseudo-inputs Z:
///   log N(y; 0, K_fu K_uu^{-1} K_uf + sigma_y^2 I)
///     - 1/(2 sigma_y^2) tr(K_ff - K_fu K_uu^{-1} K_uf).
/// O(N M^2) via Choleskys of K_uu and the M x M inner matrix.
double collapsed_bound(const Eigen::Ref<const Matrix>& X,
                       const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Matrix>& Z,
                       const Hyperparams& theta);

/// Optimal Gaussian q(u) for the collapsed bound.
BatchSgpModel fit_q(const Eigen::Ref<const Matrix>& X,
                    const Eigen::Ref<const Vector>& y,
                    const Eigen::Ref<const Matrix>& Z,
                    const Hyperparams& theta);

/// Predictive marginals of q(u) projected through p(f_s | u).
PredictiveMarginals predict(const BatchSgpModel& model,
                            const Eigen::Ref<const Matrix>& Xs);

}  // namespace streamgp
