#pragma once

#include "streamgp/streaming_pep.hpp"
#include "streamgp/streaming_vfe.hpp"
#include "streamgp/types.hpp"

#include <cstdint>
#include <functional>

namespace streamgp {

struct OptimConfig {
  int max_iters = 100;
  double grad_step = 1e-5;        // central-difference step, unconstrained space
  double convergence_tol = 1e-6;  // relative energy change
  bool optimize_pseudo = true;
  bool optimize_hypers = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Which collapsed online energy a per-batch optimisation maximises.
struct StreamObjective {
  enum class Kind { Vfe, Pep };
  Kind kind = Kind::Vfe;
  double alpha = 0.5;  // used when kind == Pep

  static StreamObjective vfe() { return {Kind::Vfe, 0.0}; }
  static StreamObjective pep(double alpha) { return {Kind::Pep, alpha}; }
};

struct OptimResult {
  Hyperparams theta;
  Matrix Z;
  double energy = 0.0;
  int iterations = 0;
};

struct AscentResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
};

/// Monotone ascent on a black-box objective: central finite-difference
/// gradients with a backtracking (halving) line search, at most 20 halvings
/// per step. Proposals where the objective throws a conditioning or
/// invalid-message error are treated as rejected steps; an error at x0
/// propagates. Never returns a value below objective(x0).
AscentResult maximize(const std::function<double(const Vector&)>& objective,
                      Vector x0, const OptimConfig& cfg);

/// Per-batch maximisation of the online energy over the stacked
/// unconstrained vector [log-hyperparameters; vec(Z)], gated by the
/// optimize_hypers / optimize_pseudo flags. The old state is a constant of
/// the objective.
OptimResult optimize_batch(const SparsePosterior& old_state,
                           const DataBatch& batch, const Hyperparams& theta_init,
                           const Matrix& Z_init, const StreamObjective& objective,
                           const OptimConfig& cfg);

/// Deterministic pseudo-input initialisation for a new batch.
///
/// Keeps the old pseudo-inputs, replacing the
/// ceil(M_b * |batch| / (|batch| + n_represented)) of them that sit closest
/// to their nearest neighbour with uniformly spaced rows of the batch; with
/// an empty old state the result is a uniformly spaced subsample of the
/// batch (exactly the batch when M_b equals its size). n_represented is the
/// number of observations the old state summarises. If M_b exceeds
/// |batch| + M_a the result is padded with jittered duplicates and a warning
/// is printed.
Matrix init_pseudo_inputs(const SparsePosterior& old_state,
                          Index n_represented, const DataBatch& batch,
                          Index M_b, std::uint64_t seed);

}  // namespace streamgp
