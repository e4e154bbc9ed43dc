#include "streamgp/kernel.hpp"

#include <cmath>

namespace streamgp {

Hyperparams Hyperparams::from_natural(const Vector& lengthscales,
                                      double signal_variance,
                                      double noise_variance) {
  require((lengthscales.array() > 0.0).all(), "lengthscales must be positive");
  require(signal_variance > 0.0, "signal variance must be positive");
  require(noise_variance > 0.0, "noise variance must be positive");
  Hyperparams h;
  h.log_lengthscales = lengthscales.array().log();
  h.log_signal_variance = std::log(signal_variance);
  h.log_noise_variance = std::log(noise_variance);
  h.check_finite();
  return h;
}

Hyperparams Hyperparams::isotropic(Index dim, double lengthscale,
                                   double signal_variance,
                                   double noise_variance) {
  return from_natural(Vector::Constant(dim, lengthscale), signal_variance,
                      noise_variance);
}

void Hyperparams::check_finite() const {
  require(log_lengthscales.size() >= 1, "hyperparameters need at least one lengthscale");
  require_finite(log_lengthscales, "log_lengthscales");
  require(std::isfinite(log_signal_variance), "log_signal_variance not finite");
  require(std::isfinite(log_noise_variance), "log_noise_variance not finite");
}

Matrix kernel_matrix(const Eigen::Ref<const Matrix>& X1,
                     const Eigen::Ref<const Matrix>& X2,
                     const Hyperparams& theta) {
  theta.check_finite();
  require(X1.cols() == theta.input_dim() && X2.cols() == theta.input_dim(),
          "kernel_matrix: input dimension does not match hyperparameters");

  const Vector inv_ls = theta.lengthscales().cwiseInverse();
  // Scale columns so squared distances are already lengthscale-weighted.
  const Matrix S1 = X1 * inv_ls.asDiagonal();
  const Matrix S2 = X2 * inv_ls.asDiagonal();

  const Vector n1 = S1.rowwise().squaredNorm();
  const Vector n2 = S2.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * S1 * S2.transpose()).colwise() + n1;
  d2.rowwise() += n2.transpose();
  d2 = d2.cwiseMax(0.0);  // guard round-off negatives

  return theta.signal_variance() * (-0.5 * d2.array()).exp().matrix();
}

Vector kernel_diag(const Eigen::Ref<const Matrix>& X, const Hyperparams& theta) {
  theta.check_finite();
  require(X.cols() == theta.input_dim() || X.rows() == 0,
          "kernel_diag: input dimension does not match hyperparameters");
  return Vector::Constant(X.rows(), theta.signal_variance());
}

}  // namespace streamgp
