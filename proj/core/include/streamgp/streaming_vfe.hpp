#pragma once

#include "streamgp/kernel.hpp"
#include "streamgp/types.hpp"

namespace streamgp {

/// Gaussian posterior q(a) = N(mean, cov) over function values at the
/// pseudo-inputs Z, together with the hyperparameters it was produced under.
/// An empty state (zero pseudo-points) encodes "nothing seen yet".
struct SparsePosterior {
  Matrix Z;             // M_a x D pseudo-inputs
  Vector mean;          // m_a
  Matrix cov;           // S_a, symmetric positive definite
  Hyperparams theta_fit;

  bool empty() const { return Z.rows() == 0; }
  Index num_pseudo() const { return Z.rows(); }

  static SparsePosterior initial() { return SparsePosterior{}; }
};

/// Collapsed online free energy with its additive parts:
///   total = gaussian_term + trace_term + delta_a.
/// gaussian_term is the log-normal part over the augmented observations,
/// trace_term is -tr(Q_f)/(2 sigma_y^2), and delta_a aggregates the
/// old-posterior correction terms (zero for an empty state).
struct EnergyBreakdown {
  double total = 0.0;
  double gaussian_term = 0.0;
  double trace_term = 0.0;
  double delta_a = 0.0;
};

struct VfeUpdateResult {
  SparsePosterior posterior;
  EnergyBreakdown energy;
};

/// One online variational update: absorbs `batch` into the running posterior,
/// moving the pseudo-inputs to Z_new under hyperparameters theta_new. The
/// old state contributes through precision-form products of its stored
/// (mean, cov) against the prior it was fit under; the message covariance
/// (S_a^{-1} - K_aa'^{-1})^{-1} is never formed explicitly.
///
/// With an empty old state the result coincides exactly with the batch
/// collapsed fit on the batch alone.
VfeUpdateResult vfe_update(const SparsePosterior& old_state,
                           const DataBatch& batch,
                           const Hyperparams& theta_new,
                           const Eigen::Ref<const Matrix>& Z_new);

/// The energy vfe_update would report, without building the new posterior.
/// This is the per-batch objective for hyperparameter and pseudo-input
/// optimisation.
EnergyBreakdown vfe_energy(const SparsePosterior& old_state,
                           const DataBatch& batch,
                           const Hyperparams& theta_new,
                           const Eigen::Ref<const Matrix>& Z_new);

/// Predictive marginals of the streaming state at test inputs Xs, using
/// `theta` for all kernel evaluations (callers normally pass
/// post.theta_fit).
PredictiveMarginals predict(const SparsePosterior& post,
                            const Eigen::Ref<const Matrix>& Xs,
                            const Hyperparams& theta);

}  // namespace streamgp
