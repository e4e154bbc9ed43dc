#pragma once

#include "streamgp/linalg.hpp"
#include "streamgp/streaming_vfe.hpp"
#include "streamgp/types.hpp"

namespace streamgp::detail {

// Kernel blocks of the current batch against the new pseudo-inputs,
// whitened by the Cholesky factor of K_bb.
struct BatchBlocks {
  CholFactor L_b;   // chol(K_bb), new hyperparameters
  Matrix Vf;        // L_b^{-1} K_bf, M_b x N
  Vector q_f_diag;  // diag(K_ff - K_fb K_bb^{-1} K_bf), >= 0 after clamping
};

// Old-posterior message products in whitened (Gram) form. Everything the
// updates need is expressed through triangular solves against chol(S_a) and
// chol(K_aa'), so ill-conditioned precisions never appear as explicit
// differences of inverses.
struct OldState {
  Index M_a = 0;
  Matrix K_ab;    // M_a x M_b, new hyperparameters
  Matrix Q_a;     // K_aa(new) - K_ab K_bb^{-1} K_ba
  Matrix A_s;     // L_Sa^{-1} K_ab
  Matrix A_k;     // L_Kaa'^{-1} K_ab
  Matrix B_s;     // L_b^{-1} A_s^T
  Matrix B_k;     // L_b^{-1} A_k^T
  Vector e_s;     // L_Sa^{-1} m_a (so m_a^T S_a^{-1} m_a = |e_s|^2)
  CholFactor L_sa;
  CholFactor L_kaa_old;
  double log_det_S_a = 0.0;
  double log_det_K_aa_old = 0.0;
  double m_quad = 0.0;      // m_a^T S_a^{-1} m_a
  double trace_PQ_a = 0.0;  // tr[(S_a^{-1} - K_aa'^{-1}) Q_a]
};

BatchBlocks batch_blocks(const DataBatch& batch, const Hyperparams& theta_new,
                         const Eigen::Ref<const Matrix>& Z_new);

OldState old_state_products(const SparsePosterior& old_state,
                            const Hyperparams& theta_new,
                            const Eigen::Ref<const Matrix>& Z_new,
                            const CholFactor& L_b);

// mean = K_sb K_bb^{-1} q_mean,
// var  = k_ss - diag(K_sb K_bb^{-1} (K_bb - q_cov) K_bb^{-1} K_bs),
// for a Gaussian q over function values at Z.
PredictiveMarginals project_predictions(const Eigen::Ref<const Matrix>& Z,
                                        const Vector& q_mean,
                                        const Matrix& q_cov,
                                        const Hyperparams& theta,
                                        const Eigen::Ref<const Matrix>& Xs);

// Builds the posterior N(L_b D^{-1} L_b^{-1} c, L_b D^{-1} L_b^T) from the
// whitened natural-parameter pieces shared by the VFE and Power-EP updates.
SparsePosterior assemble_posterior(const CholFactor& L_b,
                                   const CholFactor& L_D, const Vector& u,
                                   const Eigen::Ref<const Matrix>& Z_new,
                                   const Hyperparams& theta_new);

}  // namespace streamgp::detail
