#pragma once

#include "streamgp/kernel.hpp"
#include "streamgp/types.hpp"

#include <cstdint>

namespace streamgp {

struct TrainTestSplit {
  Matrix X_train;
  Vector y_train;
  Matrix X_test;
  Vector y_test;
};

/// Interleaved train/test split preserving row order: rows with
/// index % stride == 0 go to train, the rest to test.
TrainTestSplit interleave_split(const Eigen::Ref<const Matrix>& X,
                                const Eigen::Ref<const Vector>& y,
                                Index stride = 2);

/// Per-column affine map and its inverse.
struct AffineScaling {
  Vector scale;   // per column
  Vector offset;  // per column

  Matrix apply(const Eigen::Ref<const Matrix>& X) const;
  Matrix invert(const Eigen::Ref<const Matrix>& X) const;
};

/// Linearly rescales every column of X to [lo, hi]. A constant column is an
/// error (the map would be degenerate).
std::pair<Matrix, AffineScaling> scale_inputs(const Eigen::Ref<const Matrix>& X,
                                              double lo = 0.0, double hi = 10.0);

/// Draws a dataset from a GP with the given hyperparameters:
/// sorted uniform inputs on [0, 10] for D == 1 (a time series), a regular
/// grid over [0, 10]^D in row-major order for D >= 2 (spatial order), and
/// y ~ N(0, K_ff + sigma_y^2 I) sampled through a Cholesky factor.
/// Dense sampling, so N is capped at 5000.
std::pair<Matrix, Vector> synth_gp_stream(Index D, Index N,
                                          const Hyperparams& theta_true,
                                          std::uint64_t seed);

}  // namespace streamgp
