#pragma once

#include "streamgp/streaming_vfe.hpp"
#include "streamgp/types.hpp"

namespace streamgp {

/// Divergence parameter for the online Power-EP update. alpha in (0, 1];
/// alpha -> 0 recovers the variational update (use vfe_update for that
/// exact limit), alpha = 1 gives assumed-density-filtering behaviour.
struct PepConfig {
  double alpha = 0.5;
  void validate() const;
};

struct PepUpdateResult {
  SparsePosterior posterior;
  double energy = 0.0;
};

/// Online alpha-divergence update. Identical natural-parameter machinery to
/// vfe_update, but the effective noise blocks are inflated:
/// sigma_y^2 I + alpha diag(Q_f) on the data block and D_a + alpha Q_a on
/// the old-posterior block.
PepUpdateResult pep_update(const SparsePosterior& old_state,
                           const DataBatch& batch,
                           const Hyperparams& theta_new,
                           const Eigen::Ref<const Matrix>& Z_new,
                           const PepConfig& cfg);

/// The collapsed Power-EP energy (the optimiser's objective); equal to the
/// energy pep_update reports.
double pep_energy(const SparsePosterior& old_state, const DataBatch& batch,
                  const Hyperparams& theta_new,
                  const Eigen::Ref<const Matrix>& Z_new, const PepConfig& cfg);

// Prediction from a Power-EP state uses streamgp::predict from
// streaming_vfe.hpp; the stored state format is shared.

}  // namespace streamgp
