#pragma once

#include "streamgp/kernel.hpp"
#include "streamgp/linalg.hpp"
#include "streamgp/types.hpp"

namespace streamgp {

/// Dense exact GP regression with a cached Cholesky of K_ff + sigma_y^2 I.
/// Immutable once fitted; prediction is safe to call concurrently.
class ExactGp {
public:
  static ExactGp fit(Matrix X, Vector y, Hyperparams theta);

  double log_marginal_likelihood() const;
  PredictiveMarginals predict(const Eigen::Ref<const Matrix>& Xs) const;

  const Matrix& inputs() const { return X_; }
  const Vector& targets() const { return y_; }
  const Hyperparams& hyperparams() const { return theta_; }
  const CholFactor& noise_chol() const { return chol_; }
  Index size() const { return X_.rows(); }

private:
  ExactGp() = default;

  Matrix X_;
  Vector y_;
  Hyperparams theta_;
  CholFactor chol_;   // lower factor of K_ff + sigma_y^2 I
  Vector alpha_;      // (K_ff + sigma_y^2 I)^{-1} y
};

/// log p(y | theta) without keeping a fitted model around; objective for
/// hyperparameter optimisation of the exact baseline.
double exact_log_marginal_likelihood(const Eigen::Ref<const Matrix>& X,
                                     const Eigen::Ref<const Vector>& y,
                                     const Hyperparams& theta);

}  // namespace streamgp
