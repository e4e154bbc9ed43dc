#include "streamgp/streaming_vfe.hpp"

#include "streamgp/linalg.hpp"
#include "streaming_detail.hpp"

#include <cmath>
#include <numbers>

namespace streamgp {

namespace detail {

BatchBlocks batch_blocks(const DataBatch& batch, const Hyperparams& theta_new,
                         const Eigen::Ref<const Matrix>& Z_new) {
  require(batch.size() >= 1, "streaming update needs a non-empty batch");
  require(Z_new.rows() >= 1, "streaming update needs at least one pseudo-input");
  require(batch.X.cols() == Z_new.cols(), "batch and Z_new dimension mismatch");
  require_finite(batch.X, "batch.X");
  require_finite(batch.y, "batch.y");
  require_finite(Z_new, "Z_new");
  theta_new.check_finite();

  BatchBlocks b;
  b.L_b = chol_spd(kernel_matrix(Z_new, Z_new, theta_new), "K_bb");
  b.Vf = b.L_b.solve_lower(kernel_matrix(Z_new, batch.X, theta_new));

  const double tol = variance_round_off_tol(theta_new);
  b.q_f_diag =
      kernel_diag(batch.X, theta_new) - b.Vf.colwise().squaredNorm().transpose();
  for (Index i = 0; i < b.q_f_diag.size(); ++i) {
    if (b.q_f_diag[i] < 0.0) {
      if (b.q_f_diag[i] < -tol) throw ConditioningError("diag(Q_f)");
      b.q_f_diag[i] = 0.0;
    }
  }
  return b;
}

OldState old_state_products(const SparsePosterior& old_state,
                            const Hyperparams& theta_new,
                            const Eigen::Ref<const Matrix>& Z_new,
                            const CholFactor& L_b) {
  OldState s;
  s.M_a = old_state.num_pseudo();
  if (s.M_a == 0) return s;

  require(old_state.Z.cols() == Z_new.cols(),
          "old pseudo-inputs and Z_new dimension mismatch");
  require(old_state.mean.size() == s.M_a && old_state.cov.rows() == s.M_a &&
              old_state.cov.cols() == s.M_a,
          "old posterior fields have inconsistent sizes");
  old_state.theta_fit.check_finite();

  s.K_ab = kernel_matrix(old_state.Z, Z_new, theta_new);
  const Matrix W_a = L_b.solve_lower(s.K_ab.transpose());  // M_b x M_a
  s.Q_a = symmetrized(kernel_matrix(old_state.Z, old_state.Z, theta_new) -
                      W_a.transpose() * W_a);

  s.L_sa = chol_spd(old_state.cov, "S_a");
  s.L_kaa_old =
      chol_spd(kernel_matrix(old_state.Z, old_state.Z, old_state.theta_fit),
               "K_aa_old");

  s.A_s = s.L_sa.solve_lower(s.K_ab);
  s.A_k = s.L_kaa_old.solve_lower(s.K_ab);
  s.B_s = L_b.solve_lower(s.A_s.transpose());
  s.B_k = L_b.solve_lower(s.A_k.transpose());
  s.e_s = s.L_sa.solve_lower(old_state.mean);

  s.log_det_S_a = s.L_sa.log_det();
  s.log_det_K_aa_old = s.L_kaa_old.log_det();
  s.m_quad = s.e_s.squaredNorm();

  // tr[(S_a^{-1} - K_aa'^{-1}) Q_a] through whitened products. The trace is
  // non-negative for any valid message (posterior narrower than its prior),
  // so a negative value is pure round-off and is clamped; letting it through
  // would hand the optimiser an unbounded spurious ascent direction.
  const double tr_s =
      s.L_sa.solve_lower(s.L_sa.solve_lower(s.Q_a).transpose()).trace();
  const double tr_k =
      s.L_kaa_old.solve_lower(s.L_kaa_old.solve_lower(s.Q_a).transpose())
          .trace();
  s.trace_PQ_a = std::max(tr_s - tr_k, 0.0);
  return s;
}

PredictiveMarginals project_predictions(const Eigen::Ref<const Matrix>& Z,
                                        const Vector& q_mean,
                                        const Matrix& q_cov,
                                        const Hyperparams& theta,
                                        const Eigen::Ref<const Matrix>& Xs) {
  require(Xs.cols() == Z.cols(), "predict: test input dimension mismatch");
  const CholFactor L = chol_spd(kernel_matrix(Z, Z, theta), "K_bb");
  const Matrix A = L.solve_lower(kernel_matrix(Z, Xs, theta));  // M x S
  const Vector pm = L.solve_lower(q_mean);
  const Matrix Scaled =
      L.solve_lower(L.solve_lower(q_cov).transpose());  // L^{-1} S L^{-T}

  PredictiveMarginals out;
  out.mean = A.transpose() * pm;
  const double tol = variance_round_off_tol(theta);
  Vector lat = kernel_diag(Xs, theta) - A.colwise().squaredNorm().transpose() +
               (A.array() * (Scaled * A).array()).colwise().sum().transpose().matrix();
  for (Index i = 0; i < lat.size(); ++i) {
    if (lat[i] < 0.0) {
      if (lat[i] < -tol) throw ConditioningError("streaming predictive variance");
      lat[i] = 0.0;
    }
  }
  out.latent_var = std::move(lat);
  out.observed_var = out.latent_var.array() + theta.noise_variance();
  return out;
}

SparsePosterior assemble_posterior(const CholFactor& L_b,
                                   const CholFactor& L_D, const Vector& u,
                                   const Eigen::Ref<const Matrix>& Z_new,
                                   const Hyperparams& theta_new) {
  SparsePosterior post;
  post.Z = Z_new;
  post.theta_fit = theta_new;
  post.mean = L_b.lower() * L_D.solve(u);
  const Matrix C = L_D.solve_lower(L_b.lower().transpose());
  post.cov = symmetrized(C.transpose() * C);
  return post;
}

}  // namespace detail

namespace {

struct VfeCore {
  detail::BatchBlocks blocks;
  detail::OldState old;
  CholFactor L_D;
  Vector u;     // L_b^{-1} c
  double quad;  // c^T L_b^{-T} D^{-1} L_b^{-1} c
  EnergyBreakdown energy;
};

VfeCore compute_core(const SparsePosterior& old_state, const DataBatch& batch,
                     const Hyperparams& theta_new,
                     const Eigen::Ref<const Matrix>& Z_new) {
  VfeCore core;
  core.blocks = detail::batch_blocks(batch, theta_new, Z_new);
  core.old = detail::old_state_products(old_state, theta_new, Z_new,
                                        core.blocks.L_b);

  const double noise = theta_new.noise_variance();
  const double n = static_cast<double>(batch.size());
  const Index M_b = Z_new.rows();
  const detail::BatchBlocks& bb = core.blocks;
  const detail::OldState& os = core.old;

  Matrix D = Matrix::Identity(M_b, M_b) + (bb.Vf * bb.Vf.transpose()) / noise;
  core.u = bb.Vf * batch.y / noise;
  if (os.M_a > 0) {
    D += os.B_s * os.B_s.transpose() - os.B_k * os.B_k.transpose();
    core.u += os.B_s * os.e_s;
  }
  core.L_D = (os.M_a > 0) ? chol_message(symmetrized(D), "online inner matrix D")
                          : chol_spd(symmetrized(D), "online inner matrix D");

  const Vector t = core.L_D.solve_lower(core.u);
  core.quad = t.squaredNorm();

  const double two_pi = 2.0 * std::numbers::pi;
  EnergyBreakdown e;
  e.trace_term = -0.5 * bb.q_f_diag.sum() / noise;
  e.total = -0.5 * n * std::log(two_pi * noise) - 0.5 * core.L_D.log_det() -
            0.5 * batch.y.squaredNorm() / noise + 0.5 * core.quad +
            e.trace_term;

  if (os.M_a > 0) {
    e.total += 0.5 * (-os.log_det_S_a + os.log_det_K_aa_old - os.trace_PQ_a -
                      os.m_quad);

    // Diagnostic split: the message precision P = S_a^{-1} - K_aa'^{-1} is
    // formed explicitly here (and only here). Both parts are computed by
    // their own formulas so that total = gaussian + trace + delta checks a
    // genuine algebraic identity.
    const Matrix S_inv = os.L_sa.inverse();
    const Matrix K_inv = os.L_kaa_old.inverse();
    const Vector h = os.L_sa.solve_upper(os.e_s);  // S_a^{-1} m_a
    const SymmetricSplit split =
        ldlt_log_det_and_solve(symmetrized(S_inv - K_inv), h);
    const double log_det_Da = -split.log_abs_det;
    const double h_Da_h = h.dot(split.solve_result);
    const double m_a_count = static_cast<double>(os.M_a);

    e.delta_a = 0.5 * (-os.log_det_S_a + os.log_det_K_aa_old + log_det_Da +
                       h_Da_h - os.m_quad - os.trace_PQ_a +
                       m_a_count * std::log(two_pi));
    e.gaussian_term =
        -0.5 * (n + m_a_count) * std::log(two_pi) -
        0.5 * (n * std::log(noise) + log_det_Da + core.L_D.log_det()) -
        0.5 * (batch.y.squaredNorm() / noise + h_Da_h - core.quad);
  } else {
    e.delta_a = 0.0;
    e.gaussian_term = -0.5 * n * std::log(two_pi * noise) -
                      0.5 * core.L_D.log_det() -
                      0.5 * batch.y.squaredNorm() / noise + 0.5 * core.quad;
  }
  core.energy = e;
  return core;
}

}  // namespace

VfeUpdateResult vfe_update(const SparsePosterior& old_state,
                           const DataBatch& batch,
                           const Hyperparams& theta_new,
                           const Eigen::Ref<const Matrix>& Z_new) {
  VfeCore core = compute_core(old_state, batch, theta_new, Z_new);
  VfeUpdateResult out;
  out.posterior =
      detail::assemble_posterior(core.blocks.L_b, core.L_D, core.u, Z_new,
                                 theta_new);
  out.energy = core.energy;
  return out;
}

EnergyBreakdown vfe_energy(const SparsePosterior& old_state,
                           const DataBatch& batch,
                           const Hyperparams& theta_new,
                           const Eigen::Ref<const Matrix>& Z_new) {
  return compute_core(old_state, batch, theta_new, Z_new).energy;
}

PredictiveMarginals predict(const SparsePosterior& post,
                            const Eigen::Ref<const Matrix>& Xs,
                            const Hyperparams& theta) {
  require(!post.empty(), "predict requires a non-empty streaming state");
  return detail::project_predictions(post.Z, post.mean, post.cov, theta, Xs);
}

}  // namespace streamgp
