#pragma once

#include "streamgp/kernel.hpp"
#include "streamgp/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace streamgp {

enum class Method { SsgpVfe, SsgpPep, GpWindow, SgpWindow };

std::string to_string(Method m);
std::optional<Method> method_from_string(const std::string& name);

/// How the ordered training stream is cut into batches. The first
/// `initial_train` rows (when positive) form the first batch; subsequent
/// batches have `batch_size` rows.
struct StreamPlan {
  Index batch_size = 300;
  Index initial_train = 0;
  bool shuffle = false;  // replay order: as-given, or shuffled by seed
  std::uint64_t shuffle_seed = 0;
  Index window_size = 3000;  // memory window of the baseline refits
};

struct RunConfig {
  Method method = Method::SsgpVfe;
  double alpha = 0.5;       // ssgp-pep only
  Index num_pseudo = 100;   // sparse methods
  bool fix_hypers = false;
  bool fix_pseudo = false;
  int opt_iters = 20;
  std::uint64_t seed = 0;
  std::optional<Hyperparams> init_theta;  // default: data-driven from batch 1
};

struct IterationRecord {
  Index iteration = 0;
  double cumulative_seconds = 0.0;
  double mll = 0.0;
  double rmse = 0.0;
  double energy = 0.0;
  std::uint64_t peak_bytes = 0;
};

struct StreamData {
  Matrix X_train;
  Vector y_train;
  Matrix X_test;
  Vector y_test;
};

/// Error wrapper identifying the batch at which a streaming run aborted.
class RunError : public std::runtime_error {
public:
  RunError(Index batch_index, const std::string& cause)
      : std::runtime_error("run aborted at batch " +
                           std::to_string(batch_index) + ": " + cause),
        batch_index(batch_index) {}
  Index batch_index;
};

/// Replays the training set as an ordered stream of batches, per batch:
/// update or refit the model, predict the full test set, append a record.
/// When out_csv_path is non-empty the records are written incrementally
/// (header first, one flushed line per batch), so an aborted run leaves a
/// valid prefix behind.
std::vector<IterationRecord> run_stream(const StreamData& data,
                                        const StreamPlan& plan,
                                        const RunConfig& cfg,
                                        const std::string& out_csv_path);

/// Data-driven starting hyperparameters: per-column lengthscale from the
/// input ranges, signal and noise variance from the output variance.
Hyperparams default_hypers(const Eigen::Ref<const Matrix>& X,
                           const Eigen::Ref<const Vector>& y);

extern const std::vector<std::string> kRecordColumns;

}  // namespace streamgp
