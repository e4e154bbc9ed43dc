#include "streamgp/dataset.hpp"

#include "streamgp/linalg.hpp"
#include "streamgp/rng.hpp"

#include <algorithm>
#include <cmath>

namespace streamgp {

TrainTestSplit interleave_split(const Eigen::Ref<const Matrix>& X,
                                const Eigen::Ref<const Vector>& y,
                                Index stride) {
  require(stride >= 2, "interleave stride must be at least 2");
  require(X.rows() == y.size(), "X rows and y length differ");
  require(X.rows() >= 2, "interleave_split needs at least two rows");

  const Index n = X.rows();
  const Index n_train = (n + stride - 1) / stride;
  TrainTestSplit s;
  s.X_train.resize(n_train, X.cols());
  s.y_train.resize(n_train);
  s.X_test.resize(n - n_train, X.cols());
  s.y_test.resize(n - n_train);

  Index it = 0, ie = 0;
  for (Index i = 0; i < n; ++i) {
    if (i % stride == 0) {
      s.X_train.row(it) = X.row(i);
      s.y_train[it++] = y[i];
    } else {
      s.X_test.row(ie) = X.row(i);
      s.y_test[ie++] = y[i];
    }
  }
  return s;
}

Matrix AffineScaling::apply(const Eigen::Ref<const Matrix>& X) const {
  Matrix out = X;
  for (Index c = 0; c < X.cols(); ++c) {
    out.col(c) = scale[c] * X.col(c).array() + offset[c];
  }
  return out;
}

Matrix AffineScaling::invert(const Eigen::Ref<const Matrix>& X) const {
  Matrix out = X;
  for (Index c = 0; c < X.cols(); ++c) {
    out.col(c) = (X.col(c).array() - offset[c]) / scale[c];
  }
  return out;
}

std::pair<Matrix, AffineScaling> scale_inputs(const Eigen::Ref<const Matrix>& X,
                                              double lo, double hi) {
  require(X.rows() >= 1, "scale_inputs needs at least one row");
  require(hi > lo, "scale_inputs needs hi > lo");
  AffineScaling t;
  t.scale.resize(X.cols());
  t.offset.resize(X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    const double mn = X.col(c).minCoeff();
    const double mx = X.col(c).maxCoeff();
    require(mx > mn, "scale_inputs: column " + std::to_string(c) +
                         " is constant");
    t.scale[c] = (hi - lo) / (mx - mn);
    t.offset[c] = lo - mn * t.scale[c];
  }
  return {t.apply(X), t};
}

std::pair<Matrix, Vector> synth_gp_stream(Index D, Index N,
                                          const Hyperparams& theta_true,
                                          std::uint64_t seed) {
  require(D >= 1 && N >= 1, "synth_gp_stream needs D >= 1 and N >= 1");
  require(N <= 5000, "synth_gp_stream caps N at 5000 (dense sampling)");
  require(theta_true.input_dim() == D, "hyperparameter dimension mismatch");

  Rng rng(seed);
  Matrix X(N, D);
  if (D == 1) {
    std::vector<double> xs(static_cast<std::size_t>(N));
    for (auto& x : xs) x = rng.uniform(0.0, 10.0);
    std::sort(xs.begin(), xs.end());
    for (Index i = 0; i < N; ++i) X(i, 0) = xs[static_cast<std::size_t>(i)];
  } else {
    const auto side = static_cast<Index>(
        std::ceil(std::pow(static_cast<double>(N), 1.0 / static_cast<double>(D))));
    const double step = side > 1 ? 10.0 / static_cast<double>(side - 1) : 0.0;
    for (Index i = 0; i < N; ++i) {
      Index rem = i;
      for (Index d = D - 1; d >= 0; --d) {
        X(i, d) = static_cast<double>(rem % side) * step;
        rem /= side;
      }
    }
  }

  Matrix K = kernel_matrix(X, X, theta_true);
  K.diagonal().array() += theta_true.noise_variance();
  const CholFactor L = chol_spd(K, "sampling covariance");

  Vector z(N);
  for (Index i = 0; i < N; ++i) z[i] = rng.normal();
  return {std::move(X), L.lower() * z};
}

}  // namespace streamgp
