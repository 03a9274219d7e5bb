#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Sparse>

#include "fastquartic/types.hpp"

namespace fq {

class Metric;

/// One stored entry of a symmetric order-3 tensor. Indices are 0-based; the
/// value is T_{ijk} and is shared by every permutation of (i, j, k).
struct TensorEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  double value = 0.0;
};

/// Symmetric order-3 tensor kept as canonical (i <= j <= k) sparse entries.
/// Every contraction expands the entries over their distinct permutations, so
/// results never depend on argument order.
class SymmetricTensor3 {
 public:
  SymmetricTensor3() = default;
  /// Entries with unsorted indices are canonicalized. A repeated canonical
  /// index triple is rejected.
  SymmetricTensor3(int dim, std::vector<TensorEntry> entries);

  int dim() const { return dim_; }
  std::size_t nnz() const { return canonical_.size(); }
  const std::vector<TensorEntry>& entries() const { return canonical_; }

  /// T[x, x, x]
  double form(const Vector& x) const;
  /// T[u, w, .]
  Vector contract2(const Vector& u, const Vector& w) const;
  /// T[u, ., .]
  Matrix contract1(const Vector& u) const;
  /// Full symmetric value T_{ijk} for any index order.
  double at(int i, int j, int k) const;

 private:
  int dim_ = 0;
  std::vector<TensorEntry> canonical_;
  std::vector<TensorEntry> expanded_;
};

/// f(x) = c'x + x'Gx + T[x,x,x] + (1/24) ||Ax||_4^4 with A'A positive definite.
///
/// The value is immutable after construction; every derivative oracle below is
/// a pure function of (q, x).
class StructuredQuartic {
 public:
  /// Throws InvalidArgument on inconsistent shapes and NotPositiveDefinite when
  /// A'A has no Cholesky factorization.
  StructuredQuartic(Vector c, Matrix G, SymmetricTensor3 T, Matrix A);

  int dim() const { return static_cast<int>(c_.size()); }
  int rows() const { return static_cast<int>(A_.rows()); }

  const Vector& c() const { return c_; }
  const Matrix& G() const { return G_; }
  /// G + G'
  const Matrix& G_sym() const { return G_sym_; }
  const SymmetricTensor3& T() const { return T_; }
  const Matrix& A() const { return A_; }
  bool uses_sparse_rows() const { return A_sparse_.has_value(); }

  Vector apply_A(const Vector& x) const;
  Vector apply_At(const Vector& w) const;
  /// A' diag(w) A
  Matrix weighted_gram(const Vector& w) const;
  Matrix gram() const;

 private:
  Vector c_;
  Matrix G_;
  Matrix G_sym_;
  SymmetricTensor3 T_;
  Matrix A_;
  std::optional<Eigen::SparseMatrix<double, Eigen::RowMajor>> A_sparse_;
};

/// Regularity of f in the A'A geometry.
struct SmoothnessConstants {
  double l3 = 1.0;
  double mu4 = 1.0;

  double kappa4() const { return l3 / mu4; }

  /// L3 = 1 and the power-mean corrected modulus mu4 = 1/(72 n).
  static SmoothnessConstants for_quartic(const StructuredQuartic& q);
};

double eval_f(const StructuredQuartic& q, const Vector& x);
Vector grad_f(const StructuredQuartic& q, const Vector& x);
Vector hess_apply(const StructuredQuartic& q, const Vector& x, const Vector& h);
Matrix hess_matrix(const StructuredQuartic& q, const Vector& x);
/// Hessian at x as an operator, without materializing it.
LinearOperator hess_operator(const StructuredQuartic& q, const Vector& x);
/// grad^3 f(x)[h, h, .]
Vector third_apply(const StructuredQuartic& q, const Vector& x, const Vector& h);
/// grad^3 f(x)[h]^3
double third_form(const StructuredQuartic& q, const Vector& x, const Vector& h);
/// grad^4 f[h]^4 = ||Ah||_4^4, independent of the expansion point.
double fourth_form(const StructuredQuartic& q, const Vector& h);

/// Third-order Taylor expansion of f around x, evaluated at y.
double taylor_phi(const StructuredQuartic& q, const Vector& x, const Vector& y);

/// Omega_x(y) = Phi_x(y) + (L3/4) ||y - x||_B^4.
double omega_eval(const StructuredQuartic& q, double l3, const Metric& metric, const Vector& x,
                  const Vector& y);
Vector omega_grad(const StructuredQuartic& q, double l3, const Metric& metric, const Vector& x,
                  const Vector& y);

/// Quartic whose value is c'x + ||Ax - b||_4^4 - ||b||_4^4.
StructuredQuartic from_l4_regression(const Matrix& A, const Vector& b, const Vector& c);

/// c'x + ||Ax - b||_4^4, evaluated directly.
double l4_objective(const Matrix& A, const Vector& b, const Vector& c, const Vector& x);

}  // namespace fq
