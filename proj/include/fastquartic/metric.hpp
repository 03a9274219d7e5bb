#pragma once

#include <memory>

#include "fastquartic/types.hpp"

namespace fq {

class StructuredQuartic;

/// Linear algebra in the geometry of a symmetric positive-definite B.
///
/// Dense mode stores B and its Cholesky factor. Operator mode (chosen by
/// from_quartic when d exceeds the dense limit) keeps B = A'(A .) implicit and
/// solves every system with preconditioned conjugate gradients.
///
/// A Metric is immutable after construction. All solves allocate their own
/// workspace, so concurrent use of one instance is safe.
class Metric {
 public:
  static constexpr int kDefaultDenseLimit = 4096;

  /// Dense metric from an explicit matrix; symmetrized, then factored.
  /// Throws NotPositiveDefinite if the factorization fails.
  explicit Metric(const Matrix& B);

  /// B = A'A for the quartic's rows.
  static Metric from_quartic(const StructuredQuartic& q, int dense_limit = kDefaultDenseLimit);
  /// Implicit metric given by its action and its diagonal (Jacobi preconditioner).
  static Metric from_operator(LinearOperator apply, Vector diagonal);

  int dim() const { return dim_; }
  bool is_dense() const { return dense_ != nullptr; }

  Vector apply_b(const Vector& v) const;
  /// sqrt(v'Bv)
  double b_norm(const Vector& v) const;
  /// sqrt(g'B^{-1}g)
  double dual_norm(const Vector& g) const;

  /// B^{-1} rhs with ||B out - rhs|| <= 1e-10 ||rhs||.
  Vector solve_b(const Vector& rhs) const;

  /// (sqrt(2) lambda B + H)^{-1} rhs for a dense PSD H.
  Vector solve_shifted(const Matrix& H, double lambda, const Vector& rhs) const;
  /// Same system with H given only as an operator; conjugate gradients
  /// preconditioned by the B factor. Throws NumericalFailure carrying the
  /// achieved relative residual when max_iters (0 = automatic) is exhausted.
  Vector solve_shifted(const LinearOperator& H, double lambda, const Vector& rhs,
                       int max_iters = 0) const;

  /// Dense mode only.
  const Matrix& matrix() const;
  /// Lower Cholesky factor L with B = LL'. Dense mode only.
  const Matrix& cholesky_lower() const;

  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

 private:
  struct Dense;
  struct Implicit;

  Metric() = default;
  void estimate_spectrum();

  int dim_ = 0;
  std::shared_ptr<const Dense> dense_;
  std::shared_ptr<const Implicit> implicit_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
};

/// Simultaneous diagonalization of the pencil (H, B) with H PSD: with
/// B = LL' and L^{-1} H L^{-T} = Q diag(lambda) Q', every shifted system
/// (H + sigma B) x = r costs O(d^2) after one O(d^3) setup.
class ShiftedPencil {
 public:
  ShiftedPencil(const Metric& metric, const Matrix& H);

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  /// Eigenvalues of L^{-1} H L^{-T}, clamped at zero.
  const Vector& eigenvalues() const { return eigenvalues_; }
  /// Q' L^{-1} r
  Vector to_spectral(const Vector& r) const;
  /// L^{-T} Q z
  Vector from_spectral(const Vector& z) const;
  Vector solve(double sigma, const Vector& rhs) const;

 private:
  Matrix lower_;
  Matrix basis_;
  Vector eigenvalues_;
};

}  // namespace fq
