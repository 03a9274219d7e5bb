#include "fastquartic/quartic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <tuple>

#include "fastquartic/errors.hpp"
#include "fastquartic/metric.hpp"

namespace fq {

namespace {

void require_dim(const Vector& v, int d, const char* what) {
  if (v.size() != d) {
    throw InvalidArgument(std::string(what) + ": expected length " + std::to_string(d) + ", got " +
                          std::to_string(v.size()));
  }
}

int multiplicity(const TensorEntry& e) {
  if (e.i == e.j && e.j == e.k) return 1;
  if (e.i == e.j || e.j == e.k) return 3;
  return 6;
}

// Sparse row storage pays off only for large, mostly-empty A.
bool prefer_sparse(const Matrix& A) {
  const double total = static_cast<double>(A.rows()) * static_cast<double>(A.cols());
  if (total < 10000.0) return false;
  const double nonzeros = static_cast<double>((A.array() != 0.0).count());
  return nonzeros < 0.3 * total;
}

}  // namespace

SymmetricTensor3::SymmetricTensor3(int dim, std::vector<TensorEntry> entries) : dim_(dim) {
  if (dim < 0) throw InvalidArgument("tensor dimension must be non-negative");
  for (TensorEntry& e : entries) {
    std::array<int, 3> idx{e.i, e.j, e.k};
    for (int v : idx) {
      if (v < 0 || v >= dim) {
        throw InvalidArgument("tensor index " + std::to_string(v) + " out of range for dimension " +
                              std::to_string(dim));
      }
    }
    std::sort(idx.begin(), idx.end());
    e.i = idx[0];
    e.j = idx[1];
    e.k = idx[2];
  }
  std::sort(entries.begin(), entries.end(), [](const TensorEntry& a, const TensorEntry& b) {
    return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
  });
  for (std::size_t n = 1; n < entries.size(); ++n) {
    const auto& a = entries[n - 1];
    const auto& b = entries[n];
    if (a.i == b.i && a.j == b.j && a.k == b.k) {
      throw InvalidArgument("duplicate tensor entry (" + std::to_string(a.i) + "," +
                            std::to_string(a.j) + "," + std::to_string(a.k) + ")");
    }
  }
  canonical_ = std::move(entries);

  expanded_.reserve(canonical_.size() * 6);
  for (const TensorEntry& e : canonical_) {
    std::array<int, 3> p{e.i, e.j, e.k};
    do {
      expanded_.push_back({p[0], p[1], p[2], e.value});
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

double SymmetricTensor3::form(const Vector& x) const {
  double total = 0.0;
  for (const TensorEntry& e : canonical_) {
    total += multiplicity(e) * e.value * x[e.i] * x[e.j] * x[e.k];
  }
  return total;
}

Vector SymmetricTensor3::contract2(const Vector& u, const Vector& w) const {
  Vector out = Vector::Zero(dim_);
  for (const TensorEntry& e : expanded_) {
    out[e.k] += e.value * u[e.i] * w[e.j];
  }
  return out;
}

Matrix SymmetricTensor3::contract1(const Vector& u) const {
  Matrix out = Matrix::Zero(dim_, dim_);
  for (const TensorEntry& e : expanded_) {
    out(e.j, e.k) += e.value * u[e.i];
  }
  return out;
}

double SymmetricTensor3::at(int i, int j, int k) const {
  std::array<int, 3> idx{i, j, k};
  std::sort(idx.begin(), idx.end());
  auto it = std::lower_bound(canonical_.begin(), canonical_.end(), idx,
                             [](const TensorEntry& e, const std::array<int, 3>& key) {
                               return std::tie(e.i, e.j, e.k) < std::tie(key[0], key[1], key[2]);
                             });
  if (it != canonical_.end() && it->i == idx[0] && it->j == idx[1] && it->k == idx[2]) {
    return it->value;
  }
  return 0.0;
}

StructuredQuartic::StructuredQuartic(Vector c, Matrix G, SymmetricTensor3 T, Matrix A)
    : c_(std::move(c)), G_(std::move(G)), T_(std::move(T)), A_(std::move(A)) {
  const auto d = c_.size();
  if (d == 0) throw InvalidArgument("quartic dimension must be positive");
  if (G_.rows() != d || G_.cols() != d) throw InvalidArgument("G must be d x d");
  if (T_.dim() != d) throw InvalidArgument("T dimension must equal d");
  if (A_.cols() != d || A_.rows() == 0) throw InvalidArgument("A must be n x d with n >= 1");
  if (!c_.allFinite() || !G_.allFinite() || !A_.allFinite()) {
    throw InvalidArgument("quartic coefficients must be finite");
  }
  G_sym_ = G_ + G_.transpose();
  if (prefer_sparse(A_)) A_sparse_ = A_.sparseView();

  Eigen::LLT<Matrix> llt(gram());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("A'A is not positive definite");
  }
}

Vector StructuredQuartic::apply_A(const Vector& x) const {
  if (A_sparse_) return *A_sparse_ * x;
  return A_ * x;
}

Vector StructuredQuartic::apply_At(const Vector& w) const {
  if (A_sparse_) return A_sparse_->transpose() * w;
  return A_.transpose() * w;
}

Matrix StructuredQuartic::weighted_gram(const Vector& w) const {
  if (A_sparse_) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> scaled = w.asDiagonal() * (*A_sparse_);
    return Matrix(A_sparse_->transpose() * scaled);
  }
  return A_.transpose() * w.asDiagonal() * A_;
}

Matrix StructuredQuartic::gram() const {
  Matrix B = Matrix::Zero(dim(), dim());
  B.selfadjointView<Eigen::Lower>().rankUpdate(A_.transpose());
  return B.selfadjointView<Eigen::Lower>();
}

SmoothnessConstants SmoothnessConstants::for_quartic(const StructuredQuartic& q) {
  return {1.0, 1.0 / (72.0 * q.rows())};
}

double eval_f(const StructuredQuartic& q, const Vector& x) {
  require_dim(x, q.dim(), "eval_f");
  const Vector ax = q.apply_A(x);
  return q.c().dot(x) + x.dot(q.G() * x) + q.T().form(x) + ax.array().pow(4).sum() / 24.0;
}

Vector grad_f(const StructuredQuartic& q, const Vector& x) {
  require_dim(x, q.dim(), "grad_f");
  const Vector ax = q.apply_A(x);
  const Vector cubes = ax.array().cube();
  return q.c() + q.G_sym() * x + 3.0 * q.T().contract2(x, x) + q.apply_At(cubes) / 6.0;
}

Vector hess_apply(const StructuredQuartic& q, const Vector& x, const Vector& h) {
  require_dim(x, q.dim(), "hess_apply");
  require_dim(h, q.dim(), "hess_apply");
  const Vector ax = q.apply_A(x);
  const Vector ah = q.apply_A(h);
  const Vector w = ax.array().square() * ah.array();
  return q.G_sym() * h + 6.0 * q.T().contract2(x, h) + 0.5 * q.apply_At(w);
}

Matrix hess_matrix(const StructuredQuartic& q, const Vector& x) {
  require_dim(x, q.dim(), "hess_matrix");
  const Vector ax = q.apply_A(x);
  Matrix H = q.G_sym() + 6.0 * q.T().contract1(x) +
             0.5 * q.weighted_gram(ax.array().square().matrix());
  return 0.5 * (H + H.transpose());
}

LinearOperator hess_operator(const StructuredQuartic& q, const Vector& x) {
  require_dim(x, q.dim(), "hess_operator");
  Vector ax_sq = q.apply_A(x).array().square();
  return [&q, x, ax_sq](const Vector& h) -> Vector {
    const Vector w = ax_sq.array() * q.apply_A(h).array();
    return q.G_sym() * h + 6.0 * q.T().contract2(x, h) + 0.5 * q.apply_At(w);
  };
}

Vector third_apply(const StructuredQuartic& q, const Vector& x, const Vector& h) {
  require_dim(x, q.dim(), "third_apply");
  require_dim(h, q.dim(), "third_apply");
  const Vector ax = q.apply_A(x);
  const Vector ah = q.apply_A(h);
  const Vector w = ax.array() * ah.array().square();
  return 6.0 * q.T().contract2(h, h) + q.apply_At(w);
}

double third_form(const StructuredQuartic& q, const Vector& x, const Vector& h) {
  require_dim(x, q.dim(), "third_form");
  require_dim(h, q.dim(), "third_form");
  const Vector ax = q.apply_A(x);
  const Vector ah = q.apply_A(h);
  return 6.0 * q.T().form(h) + (ax.array() * ah.array().cube()).sum();
}

double fourth_form(const StructuredQuartic& q, const Vector& h) {
  require_dim(h, q.dim(), "fourth_form");
  return q.apply_A(h).array().pow(4).sum();
}

double taylor_phi(const StructuredQuartic& q, const Vector& x, const Vector& y) {
  require_dim(x, q.dim(), "taylor_phi");
  require_dim(y, q.dim(), "taylor_phi");
  const Vector h = y - x;
  return eval_f(q, x) + grad_f(q, x).dot(h) + 0.5 * h.dot(hess_apply(q, x, h)) +
         third_form(q, x, h) / 6.0;
}

double omega_eval(const StructuredQuartic& q, double l3, const Metric& metric, const Vector& x,
                  const Vector& y) {
  if (metric.dim() != q.dim()) throw InvalidArgument("omega_eval: metric dimension mismatch");
  const double r = metric.b_norm(y - x);
  return taylor_phi(q, x, y) + 0.25 * l3 * r * r * r * r;
}

Vector omega_grad(const StructuredQuartic& q, double l3, const Metric& metric, const Vector& x,
                  const Vector& y) {
  require_dim(x, q.dim(), "omega_grad");
  require_dim(y, q.dim(), "omega_grad");
  if (metric.dim() != q.dim()) throw InvalidArgument("omega_grad: metric dimension mismatch");
  const Vector h = y - x;
  const Vector bh = metric.apply_b(h);
  const double r2 = h.dot(bh);
  return grad_f(q, x) + hess_apply(q, x, h) + 0.5 * third_apply(q, x, h) + l3 * r2 * bh;
}

StructuredQuartic from_l4_regression(const Matrix& A, const Vector& b, const Vector& c) {
  const auto n = A.rows();
  const auto d = A.cols();
  if (b.size() != n) throw InvalidArgument("from_l4_regression: b must have one entry per row of A");
  if (c.size() != d) throw InvalidArgument("from_l4_regression: c must have one entry per column");

  // (a.x - b)^4 = u^4 - 4 b u^3 + 6 b^2 u^2 - 4 b^3 u + b^4 with u = a.x
  const Vector b2 = b.array().square();
  const Vector b3 = b.array().cube();
  Vector linear = c - 4.0 * A.transpose() * b3;
  Matrix quadratic = 6.0 * A.transpose() * b2.asDiagonal() * A;
  quadratic = 0.5 * (quadratic + quadratic.transpose()).eval();

  std::vector<TensorEntry> entries;
  if (b.cwiseAbs().maxCoeff() > 0.0) {
    const Vector wb = -4.0 * b;
    for (int i = 0; i < d; ++i) {
      const Vector ci = A.col(i).cwiseProduct(wb);
      for (int j = i; j < d; ++j) {
        const Vector cij = ci.cwiseProduct(A.col(j));
        for (int k = j; k < d; ++k) {
          const double v = cij.dot(A.col(k));
          if (v != 0.0) entries.push_back({i, j, k, v});
        }
      }
    }
  }

  Matrix scaled = std::pow(24.0, 0.25) * A;
  return StructuredQuartic(std::move(linear), std::move(quadratic),
                           SymmetricTensor3(static_cast<int>(d), std::move(entries)),
                           std::move(scaled));
}

double l4_objective(const Matrix& A, const Vector& b, const Vector& c, const Vector& x) {
  return c.dot(x) + (A * x - b).array().pow(4).sum();
}

}  // namespace fq
