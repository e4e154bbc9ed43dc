#pragma once

#include "streamgp/types.hpp"

namespace streamgp {

/// Kernel and noise parameters in unconstrained log form. Exponentiation
/// yields the positive lengthscales, signal variance and noise variance.
struct Hyperparams {
  Vector log_lengthscales;          // D entries, log(lengthscale_d)
  double log_signal_variance = 0.0; // log of the kernel amplitude sigma_f^2
  double log_noise_variance = 0.0;  // log of the observation noise sigma_y^2

  Index input_dim() const { return log_lengthscales.size(); }
  Vector lengthscales() const { return log_lengthscales.array().exp(); }
  double signal_variance() const { return std::exp(log_signal_variance); }
  double noise_variance() const { return std::exp(log_noise_variance); }

  static Hyperparams from_natural(const Vector& lengthscales,
                                  double signal_variance,
                                  double noise_variance);
  static Hyperparams isotropic(Index dim, double lengthscale,
                               double signal_variance, double noise_variance);

  void check_finite() const;
};

/// Gram block of the ARD squared-exponential kernel,
///   k(x, x') = sigma_f^2 exp(-1/2 sum_d (x_d - x'_d)^2 / l_d^2).
/// X1 is N1 x D, X2 is N2 x D; result is N1 x N2.
Matrix kernel_matrix(const Eigen::Ref<const Matrix>& X1,
                     const Eigen::Ref<const Matrix>& X2,
                     const Hyperparams& theta);

/// Diagonal of kernel_matrix(X, X, theta) in O(N); every entry is sigma_f^2
/// for this stationary kernel.
Vector kernel_diag(const Eigen::Ref<const Matrix>& X, const Hyperparams& theta);

/// How negative a mathematically non-negative variance quantity may come out
/// of a factored computation before it is treated as a conditioning error
/// rather than round-off. Solves against condition-capped factors leave
/// relative noise orders above machine precision; genuine algebra errors
/// show up at the amplitude scale, so the rail sits at one percent of it.
inline double variance_round_off_tol(const Hyperparams& theta) {
  return 0.01 * std::max(1.0, theta.signal_variance());
}

}  // namespace streamgp
