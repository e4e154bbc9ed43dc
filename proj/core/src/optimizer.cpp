#include "streamgp/optimizer.hpp"

#include "streamgp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <vector>

namespace streamgp {

void OptimConfig::validate() const {
  require(max_iters >= 0, "max_iters must be non-negative");
  require(grad_step > 0.0, "grad_step must be positive");
  require(convergence_tol > 0.0, "convergence_tol must be positive");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxHalvings = 20;

double eval_or_reject(const std::function<double(const Vector&)>& f,
                      const Vector& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kNegInf;
  } catch (const ConditioningError&) {
    return kNegInf;
  } catch (const InvalidMessageError&) {
    return kNegInf;
  } catch (const ContractViolation&) {
    // A proposal pushed a parameter out of its numeric range (e.g. an
    // overflowing log-variance); reject the step rather than abort.
    return kNegInf;
  }
}

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double f_x, double h) {
  Vector g = Vector::Zero(x.size());
  Vector xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double fp = eval_or_reject(f, xp);
    xp[i] = x[i] - h;
    const double fm = eval_or_reject(f, xp);
    xp[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - f_x) / h;
    } else if (std::isfinite(fm)) {
      g[i] = (f_x - fm) / h;
    }
  }
  return g;
}

}  // namespace

AscentResult maximize(const std::function<double(const Vector&)>& objective,
                      Vector x0, const OptimConfig& cfg) {
  cfg.validate();
  AscentResult res;
  res.x = std::move(x0);
  res.value = objective(res.x);  // errors at the initial point propagate
  require(std::isfinite(res.value), "objective not finite at initial point");
  const Index n = res.x.size();
  if (cfg.max_iters == 0 || n == 0) return res;

  // BFGS on the negated objective with finite-difference gradients and a
  // backtracking (halving) line search that only ever accepts improvements.
  Matrix H = Matrix::Identity(n, n);
  bool h_scaled = false;
  Vector g = fd_gradient(objective, res.x, res.value, cfg.grad_step);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double g_inf = g.lpNorm<Eigen::Infinity>();
    if (g_inf == 0.0) break;

    Vector d = H * g;
    if (d.dot(g) <= 0.0) {  // not an ascent direction: reset to steepest
      H.setIdentity();
      h_scaled = false;
      d = g;
    }
    double step = h_scaled ? 1.0 : 0.1 / d.lpNorm<Eigen::Infinity>();
    // Cap any single move at 10 units per unconstrained coordinate; beyond
    // that kernels overflow and the energy surface is meaningless.
    const double move = step * d.lpNorm<Eigen::Infinity>();
    if (move > 10.0) step *= 10.0 / move;

    bool accepted = false;
    double gain = 0.0;
    Vector x_new, g_new;
    for (int halving = 0; halving < kMaxHalvings; ++halving) {
      const Vector cand = res.x + step * d;
      const double f_cand = eval_or_reject(objective, cand);
      if (f_cand > res.value) {
        gain = f_cand - res.value;
        x_new = cand;
        g_new = fd_gradient(objective, cand, f_cand, cfg.grad_step);
        res.value = f_cand;
        res.iterations = iter + 1;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no improvement even at tiny steps

    const Vector s = x_new - res.x;
    const Vector y_curv = g - g_new;  // gradient change of the negated objective
    const double sy = s.dot(y_curv);
    if (sy > 1e-12 * s.norm() * y_curv.norm()) {
      if (!h_scaled) {
        H *= sy / y_curv.squaredNorm();
        h_scaled = true;
      }
      const Vector Hy = H * y_curv;
      const double yHy = y_curv.dot(Hy);
      H += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
           (Hy * s.transpose() + s * Hy.transpose()) / sy;
    }
    res.x = std::move(x_new);
    g = std::move(g_new);

    if (gain <= cfg.convergence_tol * (std::abs(res.value) + 1e-10)) break;
  }
  return res;
}

namespace {

struct Packing {
  Index dim = 0;        // input dimension D
  Index m = 0;          // pseudo-input count
  bool hypers = false;
  bool pseudo = false;

  Index size() const {
    return (hypers ? dim + 2 : 0) + (pseudo ? m * dim : 0);
  }

  Vector pack(const Hyperparams& theta, const Matrix& Z) const {
    Vector x(size());
    Index at = 0;
    if (hypers) {
      x.segment(at, dim) = theta.log_lengthscales;
      x[at + dim] = theta.log_signal_variance;
      x[at + dim + 1] = theta.log_noise_variance;
      at += dim + 2;
    }
    if (pseudo) {
      for (Index i = 0; i < m; ++i)
        for (Index d = 0; d < dim; ++d) x[at + i * dim + d] = Z(i, d);
    }
    return x;
  }

  void unpack(const Vector& x, Hyperparams& theta, Matrix& Z) const {
    Index at = 0;
    if (hypers) {
      theta.log_lengthscales = x.segment(at, dim);
      theta.log_signal_variance = x[at + dim];
      theta.log_noise_variance = x[at + dim + 1];
      at += dim + 2;
    }
    if (pseudo) {
      for (Index i = 0; i < m; ++i)
        for (Index d = 0; d < dim; ++d) Z(i, d) = x[at + i * dim + d];
    }
  }
};

}  // namespace

OptimResult optimize_batch(const SparsePosterior& old_state,
                           const DataBatch& batch, const Hyperparams& theta_init,
                           const Matrix& Z_init, const StreamObjective& objective,
                           const OptimConfig& cfg) {
  cfg.validate();
  theta_init.check_finite();

  Packing pk;
  pk.dim = theta_init.input_dim();
  pk.m = Z_init.rows();
  pk.hypers = cfg.optimize_hypers;
  pk.pseudo = cfg.optimize_pseudo;

  const auto energy_at = [&](const Hyperparams& theta, const Matrix& Z) {
    if (objective.kind == StreamObjective::Kind::Vfe) {
      return vfe_energy(old_state, batch, theta, Z).total;
    }
    return pep_energy(old_state, batch, theta, Z,
                      PepConfig{objective.alpha});
  };

  OptimResult out;
  out.theta = theta_init;
  out.Z = Z_init;

  if (pk.size() == 0) {
    out.energy = energy_at(theta_init, Z_init);
    return out;
  }

  Hyperparams theta_work = theta_init;
  Matrix Z_work = Z_init;
  const auto fn = [&](const Vector& x) {
    pk.unpack(x, theta_work, Z_work);
    return energy_at(theta_work, Z_work);
  };

  const AscentResult asc = maximize(fn, pk.pack(theta_init, Z_init), cfg);
  pk.unpack(asc.x, out.theta, out.Z);
  out.energy = asc.value;
  out.iterations = asc.iterations;
  return out;
}

Matrix init_pseudo_inputs(const SparsePosterior& old_state,
                          Index n_represented, const DataBatch& batch,
                          Index M_b, std::uint64_t seed) {
  require(M_b >= 1, "init_pseudo_inputs needs M_b >= 1");
  require(batch.size() >= 1, "init_pseudo_inputs needs a non-empty batch");
  const Index N = batch.size();
  const Index D = batch.dim();
  const Index M_a = old_state.num_pseudo();

  const auto spaced_batch_rows = [&](Index count) {
    Matrix out(count, D);
    for (Index j = 0; j < count; ++j) {
      out.row(j) = batch.X.row((j * N) / count);
    }
    return out;
  };

  if (M_b > N + M_a) {
    std::cerr << "streamgp: warning: requested " << M_b
              << " pseudo-inputs but only " << (N + M_a)
              << " distinct locations are available; padding with jittered "
                 "duplicates\n";
    Matrix out(M_b, D);
    Index at = 0;
    for (Index i = 0; i < M_a; ++i) out.row(at++) = old_state.Z.row(i);
    for (Index i = 0; i < N; ++i) out.row(at++) = batch.X.row(i);
    Rng rng(seed);
    const Vector col_span =
        (batch.X.colwise().maxCoeff() - batch.X.colwise().minCoeff())
            .cwiseMax(1.0)
            .transpose();
    for (Index i = 0; at < M_b; ++i, ++at) {
      out.row(at) = batch.X.row(i % N);
      for (Index d = 0; d < D; ++d) {
        out(at, d) += 1e-6 * col_span[d] * rng.normal();
      }
    }
    return out;
  }

  if (M_a == 0 || n_represented <= 0) return spaced_batch_rows(M_b);

  const auto frac = static_cast<double>(M_b) * static_cast<double>(N) /
                    static_cast<double>(N + n_represented);
  Index replaced = std::min<Index>(M_b, static_cast<Index>(std::ceil(frac)));
  Index kept = std::min<Index>(M_b - replaced, M_a);
  replaced = M_b - kept;

  // Nearest-neighbour distance of each old pseudo-input; the most clumped
  // ones are the ones replaced.
  Vector nn_dist(M_a);
  for (Index i = 0; i < M_a; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < M_a; ++j) {
      if (j == i) continue;
      best = std::min(best,
                      (old_state.Z.row(i) - old_state.Z.row(j)).squaredNorm());
    }
    nn_dist[i] = (M_a == 1) ? 0.0 : best;
  }
  std::vector<Index> order(M_a);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return nn_dist[a] > nn_dist[b];
  });
  std::vector<Index> kept_rows(order.begin(), order.begin() + kept);
  std::sort(kept_rows.begin(), kept_rows.end());

  Matrix out(M_b, D);
  Index at = 0;
  for (const Index row : kept_rows) out.row(at++) = old_state.Z.row(row);
  if (replaced > 0) out.bottomRows(replaced) = spaced_batch_rows(replaced);
  return out;
}

}  // namespace streamgp
