// streamgp: streaming sparse GP regression experiments.
//
// Subcommands:
//   run               replay a dataset as an ordered mini-batch stream
//   synth             draw a dataset from a GP with known hyperparameters
//   eval-equivalence  check the streaming/batch and streaming/exact
//                     equivalences that hold under fixed hyperparameters
//                     and fixed pseudo-inputs

#include "streamgp/batch_sgp.hpp"
#include "streamgp/csv.hpp"
#include "streamgp/dataset.hpp"
#include "streamgp/exact_gp.hpp"
#include "streamgp/linalg.hpp"
#include "streamgp/metrics.hpp"
#include "streamgp/optimizer.hpp"
#include "streamgp/rng.hpp"
#include "streamgp/stream_runner.hpp"
#include "streamgp/streaming_pep.hpp"
#include "streamgp/streaming_vfe.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace streamgp;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct SynthSpec {
  Index dim = 1;
  Index n = 2000;
  double lengthscale = 0.8;
  double signal_var = 1.0;
  double noise_var = 0.1;
  std::uint64_t seed = 0;
};

SynthSpec parse_synth_spec(const std::string& spec) {
  SynthSpec s;
  for (const auto& kv : split_csv_list(spec)) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--synthetic", "expected key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "dim") s.dim = std::stol(val);
    else if (key == "n") s.n = std::stol(val);
    else if (key == "lengthscale") s.lengthscale = std::stod(val);
    else if (key == "signal-var") s.signal_var = std::stod(val);
    else if (key == "noise-var") s.noise_var = std::stod(val);
    else if (key == "seed") s.seed = std::stoull(val);
    else throw CLI::ValidationError("--synthetic", "unknown key '" + key + "'");
  }
  return s;
}

int cmd_run(const std::string& method_name, double alpha,
            const std::string& data_path, const std::string& synth_spec,
            const std::string& x_cols, const std::string& y_col,
            Index batch_size, Index initial_train, Index num_pseudo,
            Index window, bool fix_hypers, bool fix_pseudo, int opt_iters,
            std::uint64_t seed, const std::string& out_path) {
  const auto method = method_from_string(method_name);
  if (!method) {
    std::cerr << "unknown method '" << method_name << "'\n";
    return 2;
  }

  Matrix X;
  Vector y;
  if (!data_path.empty()) {
    std::tie(X, y) = load_csv(data_path, split_csv_list(x_cols), y_col);
    X = scale_inputs(X).first;
  } else if (!synth_spec.empty()) {
    const SynthSpec s = parse_synth_spec(synth_spec);
    const Hyperparams theta = Hyperparams::isotropic(
        s.dim, s.lengthscale, s.signal_var, s.noise_var);
    std::tie(X, y) = synth_gp_stream(s.dim, s.n, theta, s.seed);
  } else {
    std::cerr << "one of --data or --synthetic is required\n";
    return 2;
  }

  const TrainTestSplit split = interleave_split(X, y);
  StreamData data{split.X_train, split.y_train, split.X_test, split.y_test};

  StreamPlan plan;
  plan.batch_size = batch_size;
  plan.initial_train = initial_train;
  plan.window_size = window;

  RunConfig cfg;
  cfg.method = *method;
  cfg.alpha = alpha;
  cfg.num_pseudo = num_pseudo;
  cfg.fix_hypers = fix_hypers;
  cfg.fix_pseudo = fix_pseudo;
  cfg.opt_iters = opt_iters;
  cfg.seed = seed;

  const auto records = run_stream(data, plan, cfg, out_path);
  const auto& last = records.back();
  std::printf("%s: %zu batches, final mll %.6f, final rmse %.6f (%s)\n",
              to_string(*method).c_str(), records.size(), last.mll, last.rmse,
              out_path.empty() ? "no output file" : out_path.c_str());
  return 0;
}

int cmd_synth(Index dim, Index n, double lengthscale, double signal_var,
              double noise_var, std::uint64_t seed, const std::string& out) {
  const Hyperparams theta =
      Hyperparams::isotropic(dim, lengthscale, signal_var, noise_var);
  const auto [X, y] = synth_gp_stream(dim, n, theta, seed);

  std::vector<std::string> cols;
  for (Index d = 0; d < dim; ++d) cols.push_back("x" + std::to_string(d));
  cols.push_back("y");
  Matrix table(n, dim + 1);
  table.leftCols(dim) = X;
  table.col(dim) = y;
  write_csv(out, cols, table);
  std::printf("wrote %lld rows to %s\n", static_cast<long long>(n), out.c_str());
  return 0;
}

bool report(const std::string& name, bool ok, double err, double tol) {
  std::printf("[%s] %s (max deviation %.3g, tolerance %.1g)\n",
              ok ? "PASS" : "FAIL", name.c_str(), err, tol);
  return ok;
}

// A one-dimensional series on a jittered grid: the spacing keeps the data
// Gram comfortably full rank, which matters for the recovery check where
// pseudo-inputs sit at every training input.
std::pair<Matrix, Vector> jittered_grid_series(Index n, double spacing,
                                               const Hyperparams& theta,
                                               std::uint64_t seed) {
  Rng rng(seed);
  Matrix X(n, 1);
  for (Index i = 0; i < n; ++i) {
    X(i, 0) = (static_cast<double>(i) + 0.6 * (rng.uniform() - 0.5)) * spacing;
  }
  Matrix K = kernel_matrix(X, X, theta);
  K.diagonal().array() += theta.noise_variance();
  const CholFactor L = chol_spd(K, "sampling covariance");
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = rng.normal();
  return {std::move(X), L.lower() * z};
}

int cmd_eval_equivalence() {
  bool all_ok = true;
  const Hyperparams theta = Hyperparams::isotropic(1, 0.3, 1.0, 0.15);

  // Shared synthetic stream over [0, 30].
  const auto [X, y] = jittered_grid_series(120, 0.25, theta, 7);
  const Index half = 60;
  const DataBatch b1{X.topRows(half), y.head(half)};
  const DataBatch b2{X.bottomRows(120 - half), y.tail(120 - half)};

  {  // streaming == batch collapsed fit under fixed theta and pseudo-inputs
    Matrix Z(12, 1);
    for (Index i = 0; i < 12; ++i)
      Z(i, 0) = 1.0 + 28.0 * static_cast<double>(i) / 11.0;
    const auto s1 = vfe_update(SparsePosterior::initial(), b1, theta, Z);
    const auto s2 = vfe_update(s1.posterior, b2, theta, Z);
    const BatchSgpModel batch = fit_q(X, y, Z, theta);

    const double mean_err =
        (s2.posterior.mean - batch.q_mean).lpNorm<Eigen::Infinity>();
    const double cov_err =
        (s2.posterior.cov - batch.q_cov).lpNorm<Eigen::Infinity>();
    const double energy_err = std::abs(s1.energy.total + s2.energy.total -
                                       collapsed_bound(X, y, Z, theta));
    const double err = std::max({mean_err, cov_err, energy_err});
    all_ok &= report("two-batch stream equals one batch fit (fixed kernel/Z)",
                     err < 1e-6, err, 1e-6);
  }

  {  // pseudo-inputs at every seen input recover the exact model
    const auto s1 = vfe_update(SparsePosterior::initial(), b1, theta, b1.X);
    Matrix Z2(120, 1);
    Z2 << b1.X, b2.X;
    const auto s2 = vfe_update(s1.posterior, b2, theta, Z2);
    const ExactGp exact = ExactGp::fit(X, y, theta);

    Matrix Xs(40, 1);
    for (Index i = 0; i < 40; ++i) Xs(i, 0) = 30.0 * static_cast<double>(i) / 39.0;
    const auto ps = predict(s2.posterior, Xs, theta);
    const auto pe = exact.predict(Xs);
    const double mean_err = (ps.mean - pe.mean).lpNorm<Eigen::Infinity>();
    const double var_err =
        (ps.latent_var - pe.latent_var).lpNorm<Eigen::Infinity>();
    const double energy_err = std::abs(s1.energy.total + s2.energy.total -
                                       exact.log_marginal_likelihood());
    const double err = std::max({mean_err, var_err, energy_err});
    all_ok &= report("pseudo-inputs at the data recover the exact model",
                     err < 1e-6, err, 1e-6);
  }

  {  // alpha-divergence single pass equals the one-shot update on the union
    Matrix Z(12, 1);
    for (Index i = 0; i < 12; ++i)
      Z(i, 0) = 1.0 + 28.0 * static_cast<double>(i) / 11.0;
    const PepConfig cfg{0.5};
    const auto s1 = pep_update(SparsePosterior::initial(), b1, theta, Z, cfg);
    const auto s2 = pep_update(s1.posterior, b2, theta, Z, cfg);
    const auto oneshot =
        pep_update(SparsePosterior::initial(), DataBatch{X, y}, theta, Z, cfg);
    const double mean_err =
        (s2.posterior.mean - oneshot.posterior.mean).lpNorm<Eigen::Infinity>();
    const double cov_err =
        (s2.posterior.cov - oneshot.posterior.cov).lpNorm<Eigen::Infinity>();
    const double err = std::max(mean_err, cov_err);
    all_ok &= report("two-pass alpha update equals one-shot on the union",
                     err < 1e-6, err, 1e-6);
  }

  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming sparse Gaussian process regression toolkit"};
  app.require_subcommand(1);

  // run
  std::string method = "ssgp-vfe", data_path, synth_spec, x_cols, y_col = "y",
              out_path;
  double alpha = 0.5;
  Index batch_size = 300, initial_train = 0, num_pseudo = 100, window = 3000;
  bool fix_hypers = false, fix_pseudo = false;
  int opt_iters = 20;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "replay a dataset as a batch stream");
  run->add_option("--method", method,
                  "ssgp-vfe | ssgp-pep | gp-window | sgp-window");
  run->add_option("--alpha", alpha, "divergence parameter for ssgp-pep");
  run->add_option("--data", data_path, "input CSV (header row required)");
  run->add_option("--synthetic", synth_spec,
                  "key=value list: dim,n,lengthscale,signal-var,noise-var,seed");
  run->add_option("--x-cols", x_cols, "comma-separated input column names");
  run->add_option("--y-col", y_col, "output column name");
  run->add_option("--batch-size", batch_size, "stream batch size");
  run->add_option("--initial-train", initial_train,
                  "rows in the first (warm-up) batch");
  run->add_option("--num-pseudo", num_pseudo, "pseudo-input count");
  run->add_option("--window", window, "memory window of the baselines");
  run->add_flag("--fix-hypers", fix_hypers, "keep hyperparameters fixed");
  run->add_flag("--fix-pseudo", fix_pseudo, "keep pseudo-inputs fixed");
  run->add_option("--opt-iters", opt_iters, "ascent iterations per batch");
  run->add_option("--seed", seed, "random seed");
  run->add_option("--out", out_path, "output metrics CSV");

  // synth
  Index s_dim = 1, s_n = 2000;
  double s_ls = 0.8, s_sv = 1.0, s_nv = 0.1;
  std::uint64_t s_seed = 0;
  std::string s_out = "synth.csv";
  auto* synth = app.add_subcommand("synth", "draw a dataset from a known GP");
  synth->add_option("--dim", s_dim, "input dimension");
  synth->add_option("--n", s_n, "number of rows (max 5000)");
  synth->add_option("--lengthscale", s_ls, "true lengthscale");
  synth->add_option("--signal-var", s_sv, "true signal variance");
  synth->add_option("--noise-var", s_nv, "true noise variance");
  synth->add_option("--seed", s_seed, "random seed");
  synth->add_option("--out", s_out, "output CSV path");

  auto* eval = app.add_subcommand(
      "eval-equivalence",
      "run the fixed-parameter streaming/batch equivalence checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(method, alpha, data_path, synth_spec, x_cols, y_col,
                     batch_size, initial_train, num_pseudo, window, fix_hypers,
                     fix_pseudo, opt_iters, seed, out_path);
    }
    if (synth->parsed()) {
      return cmd_synth(s_dim, s_n, s_ls, s_sv, s_nv, s_seed, s_out);
    }
    if (eval->parsed()) {
      return cmd_eval_equivalence();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
