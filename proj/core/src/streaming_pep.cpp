#include "streamgp/streaming_pep.hpp"

#include "streamgp/linalg.hpp"
#include "streaming_detail.hpp"

#include <cmath>
#include <numbers>

namespace streamgp {

void PepConfig::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0,
          "alpha must lie in (0, 1]");
}

namespace {

struct PepCore {
  detail::BatchBlocks blocks;
  CholFactor L_D;
  Vector u;
  double energy = 0.0;
};

PepCore compute_core(const SparsePosterior& old_state, const DataBatch& batch,
                     const Hyperparams& theta_new,
                     const Eigen::Ref<const Matrix>& Z_new,
                     const PepConfig& cfg) {
  cfg.validate();
  PepCore core;
  core.blocks = detail::batch_blocks(batch, theta_new, Z_new);
  const detail::OldState os = detail::old_state_products(
      old_state, theta_new, Z_new, core.blocks.L_b);
  const detail::BatchBlocks& bb = core.blocks;

  const double alpha = cfg.alpha;
  const double noise = theta_new.noise_variance();
  const double n = static_cast<double>(batch.size());
  const Index M_b = Z_new.rows();

  // Data block: Sigma_y = sigma^2 I + alpha diag(Q_f), diagonal.
  const Vector w = (noise + alpha * bb.q_f_diag.array()).inverse();
  const double y_Sy_y = (w.array() * batch.y.array().square()).sum();
  // log|Sigma_y| - N log sigma^2, kept in log1p form so the 1/alpha
  // combinations below stay accurate as alpha -> 0.
  const double T1 =
      (alpha * bb.q_f_diag.array() / noise).log1p().sum();

  Matrix D = Matrix::Identity(M_b, M_b) +
             (bb.Vf * w.asDiagonal() * bb.Vf.transpose());
  core.u = bb.Vf * (w.asDiagonal() * batch.y);

  double quad_Ma = 0.0;
  double log_det_M = 0.0;
  if (os.M_a > 0) {
    D += os.B_s * os.B_s.transpose() - os.B_k * os.B_k.transpose();
    core.u += os.B_s * os.e_s;

    // Old block: Sigma_a = D_a + alpha Q_a, handled through
    // M = I + alpha L_q^T (S_a^{-1} - K_aa'^{-1}) L_q with Q_a = L_q L_q^T.
    // A numerically-zero Q_a (pseudo-inputs retained) makes the alpha
    // correction vanish identically, so it is skipped rather than factored.
    const double qa_scale = os.Q_a.diagonal().maxCoeff();
    if (qa_scale > 1e-12 * std::max(theta_new.signal_variance(), 1.0)) {
      const CholFactor L_q = chol_spd(os.Q_a, "Q_a");
      const Matrix C_s = os.L_sa.solve_lower(L_q.lower());
      const Matrix C_k = os.L_kaa_old.solve_lower(L_q.lower());
      Matrix Mmat = Matrix::Identity(os.M_a, os.M_a) +
                    alpha * (C_s.transpose() * C_s - C_k.transpose() * C_k);
      const CholFactor L_M = chol_message(symmetrized(Mmat), "PEP old-block matrix");
      log_det_M = L_M.log_det();

      const Vector r = C_s.transpose() * os.e_s;  // L_q^T S_a^{-1} m_a
      quad_Ma = L_M.solve_lower(r).squaredNorm();

      const Matrix H =
          C_s.transpose() * os.A_s - C_k.transpose() * os.A_k;  // L_q^T P K_ab
      const Matrix Hb =
          bb.L_b.solve_lower(H.transpose()).transpose();  // H L_b^{-T}
      const Matrix G = L_M.solve_lower(Hb);
      D -= alpha * G.transpose() * G;
      core.u -= alpha * Hb.transpose() * L_M.solve(r);
    }
  }

  core.L_D = (os.M_a > 0)
                 ? chol_message(symmetrized(D), "online inner matrix D")
                 : chol_spd(symmetrized(D), "online inner matrix D");
  const double quad = core.L_D.solve_lower(core.u).squaredNorm();

  const double two_pi = 2.0 * std::numbers::pi;
  double f = -0.5 * y_Sy_y + 0.5 * alpha * quad_Ma + 0.5 * quad -
             0.5 * (n * std::log(noise) + T1) - 0.5 * core.L_D.log_det() -
             (1.0 - alpha) / (2.0 * alpha) * T1 - 0.5 * n * std::log(two_pi);
  if (os.M_a > 0) {
    f += -0.5 * os.log_det_S_a + 0.5 * os.log_det_K_aa_old -
         log_det_M / (2.0 * alpha) - 0.5 * os.m_quad;
  }
  core.energy = f;
  return core;
}

}  // namespace

PepUpdateResult pep_update(const SparsePosterior& old_state,
                           const DataBatch& batch,
                           const Hyperparams& theta_new,
                           const Eigen::Ref<const Matrix>& Z_new,
                           const PepConfig& cfg) {
  PepCore core = compute_core(old_state, batch, theta_new, Z_new, cfg);
  PepUpdateResult out;
  out.posterior = detail::assemble_posterior(core.blocks.L_b, core.L_D,
                                             core.u, Z_new, theta_new);
  out.energy = core.energy;
  return out;
}

double pep_energy(const SparsePosterior& old_state, const DataBatch& batch,
                  const Hyperparams& theta_new,
                  const Eigen::Ref<const Matrix>& Z_new,
                  const PepConfig& cfg) {
  return compute_core(old_state, batch, theta_new, Z_new, cfg).energy;
}

}  // namespace streamgp
