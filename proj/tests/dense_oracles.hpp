#pragma once

// Naive dense-formula evaluations used as independent oracles. Everything
// here goes through explicit inverses and determinants on purpose: these
// routines check the Cholesky-based implementations and must not share
// their algebra.

#include "streamgp/kernel.hpp"
#include "streamgp/streaming_vfe.hpp"
#include "streamgp/types.hpp"

#include <cmath>
#include <numbers>

namespace streamgp::oracles {

inline double dense_log_gaussian(const Vector& x, const Matrix& cov) {
  const double n = static_cast<double>(x.size());
  return -0.5 * x.dot(cov.inverse() * x) - 0.5 * std::log(cov.determinant()) -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

inline double dense_exact_lml(const Matrix& X, const Vector& y,
                              const Hyperparams& theta) {
  Matrix A = kernel_matrix(X, X, theta);
  A.diagonal().array() += theta.noise_variance();
  return dense_log_gaussian(y, A);
}

struct DensePrediction {
  Vector mean;
  Vector latent_var;
};

inline DensePrediction dense_exact_predict(const Matrix& X, const Vector& y,
                                           const Hyperparams& theta,
                                           const Matrix& Xs) {
  Matrix A = kernel_matrix(X, X, theta);
  A.diagonal().array() += theta.noise_variance();
  const Matrix Ainv = A.inverse();
  const Matrix Ksf = kernel_matrix(Xs, X, theta);
  DensePrediction p;
  p.mean = Ksf * Ainv * y;
  p.latent_var =
      kernel_diag(Xs, theta) - (Ksf * Ainv * Ksf.transpose()).diagonal();
  return p;
}

inline double dense_collapsed_bound(const Matrix& X, const Vector& y,
                                    const Matrix& Z, const Hyperparams& theta) {
  const Matrix Kuu = kernel_matrix(Z, Z, theta);
  const Matrix Kfu = kernel_matrix(X, Z, theta);
  const Matrix Kff = kernel_matrix(X, X, theta);
  const Matrix Qff = Kfu * Kuu.inverse() * Kfu.transpose();
  Matrix S = Qff;
  S.diagonal().array() += theta.noise_variance();
  return dense_log_gaussian(y, S) -
         0.5 * (Kff - Qff).trace() / theta.noise_variance();
}

struct DenseQ {
  Vector mean;
  Matrix cov;
};

inline DenseQ dense_optimal_q(const Matrix& X, const Vector& y, const Matrix& Z,
                              const Hyperparams& theta) {
  const Matrix Kuu = kernel_matrix(Z, Z, theta);
  const Matrix Kuf = kernel_matrix(Z, X, theta);
  const double noise = theta.noise_variance();
  const Matrix Sigma = (Kuu + Kuf * Kuf.transpose() / noise).inverse();
  DenseQ q;
  q.mean = Kuu * Sigma * Kuf * y / noise;
  q.cov = Kuu * Sigma * Kuu;
  return q;
}

inline DensePrediction dense_project_q(const Matrix& Z, const Vector& q_mean,
                                       const Matrix& q_cov,
                                       const Hyperparams& theta,
                                       const Matrix& Xs) {
  const Matrix Kuu = kernel_matrix(Z, Z, theta);
  const Matrix Kuu_inv = Kuu.inverse();
  const Matrix Ksu = kernel_matrix(Xs, Z, theta);
  DensePrediction p;
  p.mean = Ksu * Kuu_inv * q_mean;
  p.latent_var = kernel_diag(Xs, theta) -
                 (Ksu * Kuu_inv * (Kuu - q_cov) * Kuu_inv * Ksu.transpose())
                     .diagonal();
  return p;
}

// Collapsed online energy with the old-posterior message covariance
// D_a = (S_a^{-1} - K_aa'^{-1})^{-1} built explicitly. Valid on instances
// where the stored posterior is strictly narrower than its prior.
inline double dense_online_energy(const SparsePosterior& old_state,
                                  const DataBatch& batch,
                                  const Hyperparams& theta,
                                  const Matrix& Z_new) {
  const double noise = theta.noise_variance();
  const Index n = batch.size();
  const Index m_a = old_state.num_pseudo();

  const Matrix Kbb = kernel_matrix(Z_new, Z_new, theta);
  const Matrix Kfb = kernel_matrix(batch.X, Z_new, theta);
  const Matrix Kbb_inv = Kbb.inverse();
  const Matrix Qff =
      kernel_matrix(batch.X, batch.X, theta) - Kfb * Kbb_inv * Kfb.transpose();

  if (m_a == 0) {
    Matrix Sy = Kfb * Kbb_inv * Kfb.transpose();
    Sy.diagonal().array() += noise;
    return dense_log_gaussian(batch.y, Sy) - 0.5 * Qff.trace() / noise;
  }

  const Matrix Kab = kernel_matrix(old_state.Z, Z_new, theta);
  const Matrix Kaa_new = kernel_matrix(old_state.Z, old_state.Z, theta);
  const Matrix Kaa_old =
      kernel_matrix(old_state.Z, old_state.Z, old_state.theta_fit);
  const Matrix Sa_inv = old_state.cov.inverse();
  const Matrix Da = (Sa_inv - Kaa_old.inverse()).inverse();
  const Matrix Qa = Kaa_new - Kab * Kbb_inv * Kab.transpose();

  Vector yhat(n + m_a);
  yhat.head(n) = batch.y;
  yhat.tail(m_a) = Da * Sa_inv * old_state.mean;
  Matrix Khat(n + m_a, Z_new.rows());
  Khat.topRows(n) = Kfb;
  Khat.bottomRows(m_a) = Kab;
  Matrix Sigma_hat = Matrix::Zero(n + m_a, n + m_a);
  Sigma_hat.topLeftCorner(n, n) = noise * Matrix::Identity(n, n);
  Sigma_hat.bottomRightCorner(m_a, m_a) = Da;

  const Matrix Sy = Khat * Kbb_inv * Khat.transpose() + Sigma_hat;
  const double delta1 =
      0.5 * (-std::log(old_state.cov.determinant()) +
             std::log(Kaa_old.determinant()) + std::log(Da.determinant()) +
             old_state.mean.dot((Sa_inv * Da * Sa_inv - Sa_inv) *
                                old_state.mean) -
             (Da.inverse() * Qa).trace() +
             static_cast<double>(m_a) * std::log(2.0 * std::numbers::pi));

  return dense_log_gaussian(yhat, Sy) - 0.5 * Qff.trace() / noise + delta1;
}

inline DenseQ dense_online_posterior(const SparsePosterior& old_state,
                                     const DataBatch& batch,
                                     const Hyperparams& theta,
                                     const Matrix& Z_new) {
  const double noise = theta.noise_variance();
  const Index n = batch.size();
  const Index m_a = old_state.num_pseudo();

  const Matrix Kbb = kernel_matrix(Z_new, Z_new, theta);
  const Matrix Kfb = kernel_matrix(batch.X, Z_new, theta);
  Matrix Khat(n + m_a, Z_new.rows());
  Khat.topRows(n) = Kfb;
  Matrix Sigma_hat = Matrix::Zero(n + m_a, n + m_a);
  Sigma_hat.topLeftCorner(n, n) = noise * Matrix::Identity(n, n);
  Vector yhat(n + m_a);
  yhat.head(n) = batch.y;

  if (m_a > 0) {
    const Matrix Kab = kernel_matrix(old_state.Z, Z_new, theta);
    const Matrix Kaa_old =
        kernel_matrix(old_state.Z, old_state.Z, old_state.theta_fit);
    const Matrix Sa_inv = old_state.cov.inverse();
    const Matrix Da = (Sa_inv - Kaa_old.inverse()).inverse();
    Khat.bottomRows(m_a) = Kab;
    Sigma_hat.bottomRightCorner(m_a, m_a) = Da;
    yhat.tail(m_a) = Da * Sa_inv * old_state.mean;
  }

  const Matrix Kbb_inv = Kbb.inverse();
  const Matrix Sig_inv = Sigma_hat.inverse();
  const Matrix precision =
      Kbb_inv + Kbb_inv * Khat.transpose() * Sig_inv * Khat * Kbb_inv;
  DenseQ q;
  q.cov = precision.inverse();
  q.mean = q.cov * Kbb_inv * Khat.transpose() * Sig_inv * yhat;
  return q;
}

// Collapsed alpha-divergence energy with D_a and Sigma_a built explicitly.
inline double dense_pep_energy(const SparsePosterior& old_state,
                               const DataBatch& batch, const Hyperparams& theta,
                               const Matrix& Z_new, double alpha) {
  const double noise = theta.noise_variance();
  const Index n = batch.size();
  const Index m_a = old_state.num_pseudo();

  const Matrix Kbb = kernel_matrix(Z_new, Z_new, theta);
  const Matrix Kbb_inv = Kbb.inverse();
  const Matrix Kfb = kernel_matrix(batch.X, Z_new, theta);
  const Matrix Qff =
      kernel_matrix(batch.X, batch.X, theta) - Kfb * Kbb_inv * Kfb.transpose();

  Matrix Sigma_y = Matrix::Zero(n, n);
  Sigma_y.diagonal() = noise + alpha * Qff.diagonal().array();

  double f = static_cast<double>(n) * (1.0 - alpha) / (2.0 * alpha) *
                 std::log(noise) -
             (1.0 - alpha) / (2.0 * alpha) * std::log(Sigma_y.determinant());

  if (m_a == 0) {
    const Matrix Sy = Kfb * Kbb_inv * Kfb.transpose() + Sigma_y;
    return f + dense_log_gaussian(batch.y, Sy);
  }

  const Matrix Kab = kernel_matrix(old_state.Z, Z_new, theta);
  const Matrix Kaa_new = kernel_matrix(old_state.Z, old_state.Z, theta);
  const Matrix Kaa_old =
      kernel_matrix(old_state.Z, old_state.Z, old_state.theta_fit);
  const Matrix Sa_inv = old_state.cov.inverse();
  const Matrix Da = (Sa_inv - Kaa_old.inverse()).inverse();
  const Matrix Qa = Kaa_new - Kab * Kbb_inv * Kab.transpose();
  const Matrix Sigma_a = Da + alpha * Qa;

  Vector yhat(n + m_a);
  yhat.head(n) = batch.y;
  yhat.tail(m_a) = Da * Sa_inv * old_state.mean;
  Matrix Khat(n + m_a, Z_new.rows());
  Khat.topRows(n) = Kfb;
  Khat.bottomRows(m_a) = Kab;
  Matrix Sigma_hat = Matrix::Zero(n + m_a, n + m_a);
  Sigma_hat.topLeftCorner(n, n) = Sigma_y;
  Sigma_hat.bottomRightCorner(m_a, m_a) = Sigma_a;
  const Matrix Sy = Khat * Kbb_inv * Khat.transpose() + Sigma_hat;

  const Matrix I_a = Matrix::Identity(m_a, m_a);
  f += dense_log_gaussian(yhat, Sy) + 0.5 * std::log(Kaa_old.determinant()) -
       0.5 * std::log(old_state.cov.determinant()) +
       0.5 * std::log(Sigma_a.determinant()) -
       std::log((I_a + alpha * Da.inverse() * Qa).determinant()) /
           (2.0 * alpha) +
       0.5 * static_cast<double>(m_a) * std::log(2.0 * std::numbers::pi) +
       0.5 * old_state.mean.dot((Sa_inv * Da * Sa_inv - Sa_inv) *
                                old_state.mean);
  return f;
}

}  // namespace streamgp::oracles
