#include "streamgp/linalg.hpp"

#include <Eigen/Cholesky>

#include <atomic>
#include <cmath>

namespace streamgp {

namespace {
std::atomic<double> g_jitter_cap{1e-6};
}

double jitter_cap() { return g_jitter_cap.load(); }
void set_jitter_cap(double cap) { g_jitter_cap.store(cap); }

double CholFactor::log_det() const {
  return 2.0 * L_.diagonal().array().log().sum();
}

Matrix CholFactor::solve_lower(const Eigen::Ref<const Matrix>& B) const {
  return L_.triangularView<Eigen::Lower>().solve(B);
}

Matrix CholFactor::solve_upper(const Eigen::Ref<const Matrix>& B) const {
  return L_.transpose().triangularView<Eigen::Upper>().solve(B);
}

Matrix CholFactor::solve(const Eigen::Ref<const Matrix>& B) const {
  return solve_upper(solve_lower(B));
}

Matrix CholFactor::inverse() const {
  return solve(Matrix::Identity(L_.rows(), L_.cols()));
}

namespace {

bool try_llt(const Matrix& A, Matrix& L_out) {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) return false;
  L_out = llt.matrixL();
  // LLT can succeed with a non-positive trailing pivot on some backends;
  // reject those so the ladder escalates instead.
  if ((L_out.diagonal().array() <= 0.0).any()) return false;
  return true;
}

// Cheap condition estimate from the factor's diagonal spread.
double cond_estimate(const Matrix& L) {
  const double dmin = L.diagonal().minCoeff();
  const double dmax = L.diagonal().maxCoeff();
  const double r = dmax / std::max(dmin, 1e-300);
  return r * r;
}

CholFactor chol_with_ladder(const Eigen::Ref<const Matrix>& A_in,
                            const std::string& label, bool message_semantics) {
  Matrix A = symmetrized(A_in);
  const Index n = A.rows();
  if (n == 0) return CholFactor(Matrix(0, 0), 0.0);
  if (!A.allFinite()) throw ContractViolation(label + " contains NaN or Inf");

  // Well-conditioned matrices are factorised unperturbed; beyond the
  // condition cap the ladder regularises so that downstream precision-form
  // products keep meaningful digits. The diagonal-ratio estimate runs one
  // to two orders below the true condition number, hence the conservative
  // cap.
  constexpr double kCondCap = 1e8;

  Matrix L;
  const bool clean = !message_semantics && try_llt(A, L);
  if (clean && cond_estimate(L) <= kCondCap) return CholFactor(std::move(L), 0.0);
  if (message_semantics && try_llt(A, L)) return CholFactor(std::move(L), 0.0);

  const double scale = std::max(A.diagonal().array().abs().mean(), 1e-300);
  const double cap = jitter_cap();
  CholFactor fallback;
  bool have_fallback = clean;
  if (clean) fallback = CholFactor(L, 0.0);
  for (double rel = 1e-14; rel <= cap * (1.0 + 1e-12); rel *= 10.0) {
    const double eps = rel * scale;
    Matrix Aj = A;
    Aj.diagonal().array() += eps;
    if (try_llt(Aj, L)) {
      if (cond_estimate(L) <= kCondCap) return CholFactor(std::move(L), eps);
      if (!have_fallback) {
        fallback = CholFactor(L, eps);
        have_fallback = true;
      }
    }
  }
  // Factorisable but irreducibly ill-conditioned: use the best factor found.
  if (have_fallback) return fallback;
  if (message_semantics) throw InvalidMessageError(label + " not positive definite");
  throw ConditioningError(label);
}

}  // namespace

CholFactor chol_spd(const Eigen::Ref<const Matrix>& A, const std::string& label) {
  return chol_with_ladder(A, label, false);
}

CholFactor chol_message(const Eigen::Ref<const Matrix>& A,
                        const std::string& label) {
  return chol_with_ladder(A, label, true);
}

SymmetricSplit ldlt_log_det_and_solve(const Eigen::Ref<const Matrix>& A,
                                      const Eigen::Ref<const Vector>& b) {
  Eigen::LDLT<Matrix> ldlt(symmetrized(A));
  SymmetricSplit out;
  out.log_abs_det = ldlt.vectorD().array().abs().max(1e-300).log().sum();
  out.solve_result = ldlt.solve(b);
  return out;
}

}  // namespace streamgp
