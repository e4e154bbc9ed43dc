#pragma once

#include "streamgp/types.hpp"

namespace streamgp {

/// Largest relative jitter tried before a Cholesky is declared failed.
/// Configurable process-wide; the escalation ladder starts far below this
/// so that well-conditioned matrices are factorised without perturbation.
double jitter_cap();
void set_jitter_cap(double cap);

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix,
/// with solve and log-determinant helpers.
class CholFactor {
public:
  CholFactor() = default;
  CholFactor(Matrix L, double applied_jitter)
      : L_(std::move(L)), jitter_(applied_jitter) {}

  const Matrix& lower() const { return L_; }
  double applied_jitter() const { return jitter_; }
  Index size() const { return L_.rows(); }

  // log|A| where A = L L^T
  double log_det() const;

  // L^{-1} B and L^{-T} B
  Matrix solve_lower(const Eigen::Ref<const Matrix>& B) const;
  Matrix solve_upper(const Eigen::Ref<const Matrix>& B) const;
  // A^{-1} B
  Matrix solve(const Eigen::Ref<const Matrix>& B) const;
  // Dense A^{-1} (used for small precision-form blocks only)
  Matrix inverse() const;

private:
  Matrix L_;
  double jitter_ = 0.0;
};

/// Cholesky with a clean attempt first, then an escalating relative jitter
/// ladder up to jitter_cap() * mean diagonal. Throws ConditioningError
/// naming `label` if every attempt fails.
CholFactor chol_spd(const Eigen::Ref<const Matrix>& A, const std::string& label);

/// Like chol_spd but failure is reported as an invalid-message condition
/// (used for matrices whose definiteness encodes message validity).
CholFactor chol_message(const Eigen::Ref<const Matrix>& A,
                        const std::string& label);

struct SymmetricSplit {
  double log_abs_det = 0.0;  // log|det A| via LDLT, sign dropped
  Vector solve_result;       // A^{-1} b
};

/// Robust symmetric factorisation used for diagnostic energy splits where
/// the matrix is positive definite on every valid instance but may be
/// numerically borderline. Never throws.
SymmetricSplit ldlt_log_det_and_solve(const Eigen::Ref<const Matrix>& A,
                                      const Eigen::Ref<const Vector>& b);

inline Matrix symmetrized(const Eigen::Ref<const Matrix>& A) {
  return 0.5 * (A + A.transpose());
}

}  // namespace streamgp
