#include "streamgp/batch_sgp.hpp"

#include "streamgp/linalg.hpp"

#include <cmath>
#include <numbers>

namespace streamgp {

namespace {

struct CollapsedBoundWorkspace {
  CholFactor L_u;   // chol(K_uu)
  Matrix V;         // L_u^{-1} K_uf, M x N
  CholFactor L_B;   // chol(I + V V^T / sigma^2)
  Vector Vy;        // V y
  double trace_residual;  // tr(K_ff - K_fu K_uu^{-1} K_uf)
};

CollapsedBoundWorkspace build_workspace(const Eigen::Ref<const Matrix>& X,
                                 const Eigen::Ref<const Vector>& y,
                                 const Eigen::Ref<const Matrix>& Z,
                                 const Hyperparams& theta) {
  require(Z.rows() >= 1, "sparse GP needs at least one pseudo-input");
  require(X.rows() >= 1, "sparse GP needs at least one observation");
  require(X.rows() == y.size(), "X rows and y length differ");
  require(X.cols() == Z.cols(), "X and Z dimension mismatch");
  require_finite(X, "X");
  require_finite(y, "y");
  require_finite(Z, "Z");

  CollapsedBoundWorkspace w;
  w.L_u = chol_spd(kernel_matrix(Z, Z, theta), "K_uu");
  const Matrix Kuf = kernel_matrix(Z, X, theta);
  w.V = w.L_u.solve_lower(Kuf);

  const double noise = theta.noise_variance();
  Matrix B = Matrix::Identity(Z.rows(), Z.rows()) +
             (w.V * w.V.transpose()) / noise;
  w.L_B = chol_spd(B, "collapsed-bound inner matrix");
  w.Vy = w.V * y;
  w.trace_residual =
      kernel_diag(X, theta).sum() - w.V.colwise().squaredNorm().sum();
  return w;
}

}  // namespace

double collapsed_bound(const Eigen::Ref<const Matrix>& X,
                       const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Matrix>& Z,
                       const Hyperparams& theta) {
  const CollapsedBoundWorkspace w = build_workspace(X, y, Z, theta);
  const double noise = theta.noise_variance();
  const double n = static_cast<double>(y.size());

  // log N(y; 0, Q_ff + sigma^2 I) by the determinant and Woodbury identities.
  const double log_det = n * std::log(noise) + w.L_B.log_det();
  const Vector t = w.L_B.solve_lower(w.Vy);
  const double quad = (y.squaredNorm() - t.squaredNorm() / noise) / noise;

  const double gauss = -0.5 * n * std::log(2.0 * std::numbers::pi) -
                       0.5 * log_det - 0.5 * quad;
  return gauss - 0.5 * w.trace_residual / noise;
}

BatchSgpModel fit_q(const Eigen::Ref<const Matrix>& X,
                    const Eigen::Ref<const Vector>& y,
                    const Eigen::Ref<const Matrix>& Z,
                    const Hyperparams& theta) {
  const CollapsedBoundWorkspace w = build_workspace(X, y, Z, theta);
  const double noise = theta.noise_variance();

  // q(u) = N(L_u B^{-1} V y / sigma^2, L_u B^{-1} L_u^T)
  const Matrix C = w.L_B.solve_lower(w.L_u.lower().transpose());
  BatchSgpModel m;
  m.Z = Z;
  m.theta = theta;
  m.q_cov = symmetrized(C.transpose() * C);
  m.q_mean = w.L_u.lower() * w.L_B.solve(w.Vy) / noise;
  return m;
}

PredictiveMarginals predict(const BatchSgpModel& model,
                            const Eigen::Ref<const Matrix>& Xs) {
  require(Xs.cols() == model.Z.cols(), "predict: test input dimension mismatch");
  const CholFactor L_u = chol_spd(kernel_matrix(model.Z, model.Z, model.theta),
                                  "K_uu");
  const Matrix A = L_u.solve_lower(kernel_matrix(model.Z, Xs, model.theta));
  const Vector proj_mean = L_u.solve_lower(model.q_mean);
  const Matrix Scaled = L_u.solve_lower(
      L_u.solve_lower(model.q_cov).transpose());  // L^{-1} S L^{-T}

  PredictiveMarginals out;
  out.mean = A.transpose() * proj_mean;
  const double tol = variance_round_off_tol(model.theta);
  Vector lat = kernel_diag(Xs, model.theta) -
               A.colwise().squaredNorm().transpose() +
               (A.array() * (Scaled * A).array()).colwise().sum().transpose().matrix();
  for (Index i = 0; i < lat.size(); ++i) {
    if (lat[i] < 0.0) {
      if (lat[i] < -tol) throw ConditioningError("sparse predictive variance");
      lat[i] = 0.0;
    }
  }
  out.latent_var = std::move(lat);
  out.observed_var = out.latent_var.array() + model.theta.noise_variance();
  return out;
}

}  // namespace streamgp
