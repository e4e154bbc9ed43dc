#include "streamgp/exact_gp.hpp"

#include <cmath>
#include <numbers>

namespace streamgp {

ExactGp ExactGp::fit(Matrix X, Vector y, Hyperparams theta) {
  theta.check_finite();
  require(X.rows() >= 1, "exact GP fit needs at least one observation");
  require(X.rows() == y.size(), "exact GP fit: X rows and y length differ");
  require_finite(X, "X");
  require_finite(y, "y");

  ExactGp m;
  m.X_ = std::move(X);
  m.y_ = std::move(y);
  m.theta_ = std::move(theta);

  Matrix A = kernel_matrix(m.X_, m.X_, m.theta_);
  A.diagonal().array() += m.theta_.noise_variance();
  m.chol_ = chol_spd(A, "K_ff + noise");
  m.alpha_ = m.chol_.solve(m.y_);
  return m;
}

double ExactGp::log_marginal_likelihood() const {
  const double n = static_cast<double>(y_.size());
  return -0.5 * y_.dot(alpha_) - 0.5 * chol_.log_det() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

PredictiveMarginals ExactGp::predict(const Eigen::Ref<const Matrix>& Xs) const {
  require(Xs.cols() == X_.cols(), "predict: test input dimension mismatch");
  const Matrix Ksf = kernel_matrix(Xs, X_, theta_);

  PredictiveMarginals out;
  out.mean = Ksf * alpha_;

  // latent variance: k_ss - diag(K_sf A^{-1} K_fs)
  const Matrix V = chol_.solve_lower(Ksf.transpose());  // N x S
  const double tol = variance_round_off_tol(theta_);
  Vector lat = kernel_diag(Xs, theta_) - V.colwise().squaredNorm().transpose();
  for (Index i = 0; i < lat.size(); ++i) {
    if (lat[i] < 0.0) {
      if (lat[i] < -tol) throw ConditioningError("exact predictive variance");
      lat[i] = 0.0;
    }
  }
  out.latent_var = std::move(lat);
  out.observed_var = out.latent_var.array() + theta_.noise_variance();
  return out;
}

double exact_log_marginal_likelihood(const Eigen::Ref<const Matrix>& X,
                                     const Eigen::Ref<const Vector>& y,
                                     const Hyperparams& theta) {
  Matrix A = kernel_matrix(X, X, theta);
  A.diagonal().array() += theta.noise_variance();
  const CholFactor chol = chol_spd(A, "K_ff + noise");
  const Vector alpha = chol.solve(y);
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(alpha) - 0.5 * chol.log_det() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace streamgp
