#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace streamgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when a caller violates an operation's preconditions
/// (dimension mismatch, non-finite inputs, empty data where data is required).
class ContractViolation : public std::invalid_argument {
public:
  explicit ContractViolation(const std::string& what)
      : std::invalid_argument(what) {}
};

/// Thrown when a matrix that must be positive definite cannot be factorised
/// even after diagonal regularisation. The message names the offending matrix.
class ConditioningError : public std::runtime_error {
public:
  explicit ConditioningError(const std::string& matrix_name)
      : std::runtime_error("matrix not positive definite after jitter: " +
                           matrix_name) {}
};

/// Thrown by a streaming update when the stored posterior is not a valid
/// message, i.e. it is wider than the prior it was fit under in some
/// direction, so the implied likelihood factor has no Gaussian form.
class InvalidMessageError : public std::runtime_error {
public:
  explicit InvalidMessageError(const std::string& detail)
      : std::runtime_error("invalid old-posterior message: " + detail) {}
};

/// CSV / text parse failure carrying a 1-based line number.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& detail, long line)
      : std::runtime_error(detail + " (line " + std::to_string(line) + ")"),
        line_number(line) {}
  long line_number;
};

/// One block of streamed observations.
struct DataBatch {
  Matrix X;  // N x D inputs
  Vector y;  // N outputs

  Index size() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

/// Per-test-point Gaussian predictive marginals.
struct PredictiveMarginals {
  Vector mean;
  Vector latent_var;    // variance of f(x*)
  Vector observed_var;  // latent_var + noise variance
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

inline void require_finite(const Eigen::Ref<const Matrix>& m,
                           const std::string& name) {
  if (!m.allFinite()) throw ContractViolation(name + " contains NaN or Inf");
}

}  // namespace streamgp
