#include "streamgp/stream_runner.hpp"

#include "streamgp/batch_sgp.hpp"
#include "streamgp/csv.hpp"
#include "streamgp/exact_gp.hpp"
#include "streamgp/metrics.hpp"
#include "streamgp/optimizer.hpp"
#include "streamgp/rng.hpp"
#include "streamgp/streaming_pep.hpp"
#include "streamgp/streaming_vfe.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>

namespace streamgp {

const std::vector<std::string> kRecordColumns = {
    "iteration", "cumulative_seconds", "mll", "rmse", "energy", "peak_bytes"};

std::string to_string(Method m) {
  switch (m) {
    case Method::SsgpVfe: return "ssgp-vfe";
    case Method::SsgpPep: return "ssgp-pep";
    case Method::GpWindow: return "gp-window";
    case Method::SgpWindow: return "sgp-window";
  }
  return "unknown";
}

std::optional<Method> method_from_string(const std::string& name) {
  if (name == "ssgp-vfe") return Method::SsgpVfe;
  if (name == "ssgp-pep") return Method::SsgpPep;
  if (name == "gp-window") return Method::GpWindow;
  if (name == "sgp-window") return Method::SgpWindow;
  return std::nullopt;
}

Hyperparams default_hypers(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y) {
  require(X.rows() >= 2, "default_hypers needs at least two rows");
  Vector ls(X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    const double range = X.col(c).maxCoeff() - X.col(c).minCoeff();
    ls[c] = std::max(range / 10.0, 1e-3);
  }
  const double mean = y.mean();
  const double var = std::max(
      (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1),
      1e-6);
  return Hyperparams::from_natural(ls, var, 0.1 * var);
}

namespace {

struct BatchBoundaries {
  std::vector<std::pair<Index, Index>> spans;  // [begin, end)
};

BatchBoundaries plan_batches(Index n, const StreamPlan& plan) {
  require(plan.batch_size >= 1, "batch_size must be at least 1");
  require(plan.initial_train >= 0, "initial_train must be non-negative");
  BatchBoundaries b;
  Index at = 0;
  if (plan.initial_train > 0) {
    const Index end = std::min(plan.initial_train, n);
    b.spans.emplace_back(at, end);
    at = end;
  }
  while (at < n) {
    const Index end = std::min(at + plan.batch_size, n);
    b.spans.emplace_back(at, end);
    at = end;
  }
  require(!b.spans.empty(), "stream has no data");
  return b;
}

std::uint64_t doubles_to_bytes(double count) {
  return static_cast<std::uint64_t>(count) * sizeof(double);
}

// Deterministic model-state accounting: matrix element counts times the
// element size, covering the persistent state plus the per-batch update and
// prediction workspaces. Wall-clock-free and platform independent.
std::uint64_t ssgp_bytes(Index M_a, Index M_b, Index n_batch, Index n_test,
                         Index D) {
  const double state = static_cast<double>(M_b) * D + M_b +
                       static_cast<double>(M_b) * M_b;
  const double update = 6.0 * M_b * M_b + 2.0 * static_cast<double>(n_batch) * M_b +
                        2.0 * n_batch + 3.0 * static_cast<double>(M_a) * M_b +
                        4.0 * static_cast<double>(M_a) * M_a;
  const double pred = static_cast<double>(n_test) * M_b + 3.0 * n_test;
  return doubles_to_bytes(state + update + pred);
}

std::uint64_t gp_window_bytes(Index n_window, Index n_test, Index D) {
  const double fit = 2.0 * static_cast<double>(n_window) * n_window +
                     static_cast<double>(n_window) * (D + 2);
  const double pred = static_cast<double>(n_test) * n_window + 3.0 * n_test;
  return doubles_to_bytes(fit + pred);
}

std::uint64_t sgp_window_bytes(Index n_window, Index M, Index n_test, Index D) {
  const double fit = 2.0 * static_cast<double>(n_window) * M + 5.0 * M * M +
                     static_cast<double>(n_window) * (D + 2) +
                     static_cast<double>(M) * D;
  const double pred = static_cast<double>(n_test) * M + 3.0 * n_test;
  return doubles_to_bytes(fit + pred);
}

// theta-only ascent used by the windowed baselines.
Hyperparams optimize_hypers_only(
    const std::function<double(const Hyperparams&)>& objective,
    const Hyperparams& theta_init, int max_iters) {
  if (max_iters <= 0) return theta_init;
  const Index d = theta_init.input_dim();
  Vector x0(d + 2);
  x0.head(d) = theta_init.log_lengthscales;
  x0[d] = theta_init.log_signal_variance;
  x0[d + 1] = theta_init.log_noise_variance;

  Hyperparams work = theta_init;
  const auto fn = [&](const Vector& x) {
    work.log_lengthscales = x.head(d);
    work.log_signal_variance = x[d];
    work.log_noise_variance = x[d + 1];
    return objective(work);
  };
  OptimConfig oc;
  oc.max_iters = max_iters;
  const AscentResult res = maximize(fn, x0, oc);
  Hyperparams out = theta_init;
  out.log_lengthscales = res.x.head(d);
  out.log_signal_variance = res.x[d];
  out.log_noise_variance = res.x[d + 1];
  return out;
}

struct CsvSink {
  std::ofstream out;
  bool active = false;

  explicit CsvSink(const std::string& path) {
    if (path.empty()) return;
    out.open(path);
    if (!out) throw ParseError("cannot open file for writing: " + path, 0);
    active = true;
    for (std::size_t i = 0; i < kRecordColumns.size(); ++i) {
      out << kRecordColumns[i] << (i + 1 == kRecordColumns.size() ? "\n" : ",");
    }
    out.flush();
  }

  void append(const IterationRecord& r) {
    if (!active) return;
    out << r.iteration << ',' << format_double(r.cumulative_seconds) << ','
        << format_double(r.mll) << ',' << format_double(r.rmse) << ','
        << format_double(r.energy) << ',' << r.peak_bytes << "\n";
    out.flush();
  }
};

}  // namespace

std::vector<IterationRecord> run_stream(const StreamData& data,
                                        const StreamPlan& plan,
                                        const RunConfig& cfg,
                                        const std::string& out_csv_path) {
  require(data.X_train.rows() == data.y_train.size(),
          "train inputs/outputs length mismatch");
  require(data.X_test.rows() == data.y_test.size(),
          "test inputs/outputs length mismatch");
  require(data.X_train.rows() >= 2, "stream needs at least two training rows");
  require(data.X_test.rows() >= 1, "stream needs at least one test row");
  const bool windowed =
      cfg.method == Method::GpWindow || cfg.method == Method::SgpWindow;
  if (windowed) {
    require(plan.window_size >= plan.batch_size,
            "window_size must be at least batch_size");
  }

  // Replay order.
  std::vector<Index> order(static_cast<std::size_t>(data.X_train.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  if (plan.shuffle) {
    Rng rng(plan.shuffle_seed);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.integer(i)]);
    }
  }
  Matrix X_stream(data.X_train.rows(), data.X_train.cols());
  Vector y_stream(data.y_train.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    X_stream.row(static_cast<Index>(i)) = data.X_train.row(order[i]);
    y_stream[static_cast<Index>(i)] = data.y_train[order[i]];
  }

  const BatchBoundaries bounds = plan_batches(X_stream.rows(), plan);
  CsvSink sink(out_csv_path);
  std::vector<IterationRecord> records;

  SparsePosterior state = SparsePosterior::initial();
  Hyperparams theta;
  bool theta_ready = false;
  Index n_seen = 0;
  std::uint64_t peak_bytes = 0;
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t k = 0; k < bounds.spans.size(); ++k) {
    const auto [begin, end] = bounds.spans[k];
    DataBatch batch{X_stream.middleRows(begin, end - begin),
                    y_stream.segment(begin, end - begin)};
    try {
      if (!theta_ready) {
        theta = cfg.init_theta ? *cfg.init_theta
                               : default_hypers(batch.X, batch.y);
        theta_ready = true;
      }

      IterationRecord rec;
      rec.iteration = static_cast<Index>(k);
      PredictiveMarginals pred;

      if (cfg.method == Method::SsgpVfe || cfg.method == Method::SsgpPep) {
        const Index M_a = state.num_pseudo();
        Matrix Z_init;
        if (cfg.fix_pseudo && !state.empty()) {
          Z_init = state.Z;
        } else {
          Z_init = init_pseudo_inputs(state, n_seen, batch, cfg.num_pseudo,
                                      cfg.seed + static_cast<std::uint64_t>(k));
        }

        const StreamObjective objective =
            cfg.method == Method::SsgpVfe ? StreamObjective::vfe()
                                          : StreamObjective::pep(cfg.alpha);
        OptimConfig oc;
        oc.max_iters = cfg.opt_iters;
        oc.optimize_hypers = !cfg.fix_hypers;
        oc.optimize_pseudo = !cfg.fix_pseudo;
        oc.seed = cfg.seed;
        const OptimResult opt =
            optimize_batch(state, batch, theta, Z_init, objective, oc);

        if (cfg.method == Method::SsgpVfe) {
          VfeUpdateResult up = vfe_update(state, batch, opt.theta, opt.Z);
          state = std::move(up.posterior);
          rec.energy = up.energy.total;
        } else {
          PepUpdateResult up =
              pep_update(state, batch, opt.theta, opt.Z, PepConfig{cfg.alpha});
          state = std::move(up.posterior);
          rec.energy = up.energy;
        }
        theta = opt.theta;
        pred = predict(state, data.X_test, theta);
        peak_bytes = std::max(
            peak_bytes, ssgp_bytes(M_a, state.num_pseudo(), batch.size(),
                                   data.X_test.rows(), batch.dim()));
      } else {
        // Windowed baselines refit from scratch on the most recent rows,
        // warm-starting the hyperparameters from the previous batch.
        const Index upto = end;
        const Index w_begin = std::max<Index>(0, upto - plan.window_size);
        const Matrix Xw = X_stream.middleRows(w_begin, upto - w_begin);
        const Vector yw = y_stream.segment(w_begin, upto - w_begin);

        if (cfg.method == Method::GpWindow) {
          if (!cfg.fix_hypers) {
            theta = optimize_hypers_only(
                [&](const Hyperparams& t) {
                  return exact_log_marginal_likelihood(Xw, yw, t);
                },
                theta, cfg.opt_iters);
          }
          const ExactGp model = ExactGp::fit(Xw, yw, theta);
          rec.energy = model.log_marginal_likelihood();
          pred = model.predict(data.X_test);
          peak_bytes = std::max(peak_bytes, gp_window_bytes(Xw.rows(),
                                                            data.X_test.rows(),
                                                            Xw.cols()));
        } else {
          DataBatch wbatch{Xw, yw};
          Matrix Z = init_pseudo_inputs(SparsePosterior::initial(), 0, wbatch,
                                        std::min<Index>(cfg.num_pseudo, Xw.rows()),
                                        cfg.seed);
          OptimConfig oc;
          oc.max_iters = cfg.opt_iters;
          oc.optimize_hypers = !cfg.fix_hypers;
          oc.optimize_pseudo = !cfg.fix_pseudo;
          oc.seed = cfg.seed;
          const OptimResult opt = optimize_batch(
              SparsePosterior::initial(), wbatch, theta, Z,
              StreamObjective::vfe(), oc);
          theta = opt.theta;
          rec.energy = opt.energy;
          const BatchSgpModel model = fit_q(Xw, yw, opt.Z, theta);
          pred = predict(model, data.X_test);
          peak_bytes = std::max(
              peak_bytes, sgp_window_bytes(Xw.rows(), opt.Z.rows(),
                                           data.X_test.rows(), Xw.cols()));
        }
      }

      n_seen += batch.size();
      const Metrics m = compute_metrics(pred, data.y_test);
      rec.mll = m.mll;
      rec.rmse = m.rmse;
      rec.peak_bytes = peak_bytes;
      rec.cumulative_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      records.push_back(rec);
      sink.append(rec);
    } catch (const ContractViolation& e) {
      throw RunError(static_cast<Index>(k), e.what());
    } catch (const ConditioningError& e) {
      throw RunError(static_cast<Index>(k), e.what());
    } catch (const InvalidMessageError& e) {
      throw RunError(static_cast<Index>(k), e.what());
    }
  }
  return records;
}

}  // namespace streamgp
