#include "fastquartic/metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fastquartic/errors.hpp"
#include "fastquartic/quartic.hpp"

namespace fq {

namespace {

constexpr double kSolveResidual = 1e-10;
constexpr int kExactSpectrumLimit = 256;

void require_dim(const Vector& v, int d, const char* what) {
  if (v.size() != d) {
    throw InvalidArgument(std::string(what) + ": expected length " + std::to_string(d) + ", got " +
                          std::to_string(v.size()));
  }
}

// Preconditioned CG for an SPD operator; returns the achieved relative residual.
double pcg(const LinearOperator& apply, const LinearOperator& precond, const Vector& rhs, Vector& x,
           double rel_tol, int max_iters) {
  const double rhs_norm = rhs.norm();
  x = Vector::Zero(rhs.size());
  if (rhs_norm == 0.0) return 0.0;
  Vector r = rhs;
  Vector z = precond(r);
  Vector p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector ap = apply(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    rel = r.norm() / rhs_norm;
    if (rel <= rel_tol) return rel;
    z = precond(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  // recompute the true residual before reporting
  return (rhs - apply(x)).norm() / rhs_norm;
}

}  // namespace

struct Metric::Dense {
  Matrix B;
  Eigen::LLT<Matrix> llt;
  Matrix lower;
};

struct Metric::Implicit {
  LinearOperator apply;
  Vector diagonal;
};

Metric::Metric(const Matrix& B) {
  if (B.rows() != B.cols() || B.rows() == 0) throw InvalidArgument("metric must be square, d >= 1");
  if (!B.allFinite()) throw InvalidArgument("metric entries must be finite");
  auto dense = std::make_shared<Dense>();
  dense->B = 0.5 * (B + B.transpose());
  dense->llt.compute(dense->B);
  if (dense->llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("metric matrix is not positive definite");
  }
  dense->lower = dense->llt.matrixL();
  dim_ = static_cast<int>(B.rows());
  dense_ = std::move(dense);
  estimate_spectrum();
}

Metric Metric::from_quartic(const StructuredQuartic& q, int dense_limit) {
  if (q.dim() <= dense_limit) return Metric(q.gram());
  auto shared = std::make_shared<StructuredQuartic>(q);
  Vector diagonal = q.A().colwise().squaredNorm().transpose();
  return from_operator([shared](const Vector& v) { return shared->apply_At(shared->apply_A(v)); },
                       std::move(diagonal));
}

Metric Metric::from_operator(LinearOperator apply, Vector diagonal) {
  if (diagonal.size() == 0) throw InvalidArgument("operator metric needs a diagonal");
  if ((diagonal.array() <= 0.0).any()) {
    throw NotPositiveDefinite("operator metric has a non-positive diagonal entry");
  }
  Metric m;
  m.dim_ = static_cast<int>(diagonal.size());
  auto implicit = std::make_shared<Implicit>();
  implicit->apply = std::move(apply);
  implicit->diagonal = std::move(diagonal);
  m.implicit_ = std::move(implicit);
  m.estimate_spectrum();
  return m;
}

void Metric::estimate_spectrum() {
  if (dense_ && dim_ <= kExactSpectrumLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(dense_->B, Eigen::EigenvaluesOnly);
    lambda_min_ = eig.eigenvalues()(0);
    lambda_max_ = eig.eigenvalues()(dim_ - 1);
    return;
  }
  // Power and inverse-power iterations: diagnostics only.
  Vector v = Vector::Ones(dim_).normalized();
  for (int it = 0; it < 50; ++it) v = apply_b(v).normalized();
  lambda_max_ = v.dot(apply_b(v));
  Vector w = Vector::Ones(dim_).normalized();
  try {
    for (int it = 0; it < 20; ++it) w = solve_b(w).normalized();
    lambda_min_ = w.dot(apply_b(w));
  } catch (const NumericalFailure&) {
    lambda_min_ = 0.0;
  }
}

Vector Metric::apply_b(const Vector& v) const {
  require_dim(v, dim_, "apply_b");
  if (dense_) return dense_->B * v;
  return implicit_->apply(v);
}

double Metric::b_norm(const Vector& v) const {
  return std::sqrt(std::max(0.0, v.dot(apply_b(v))));
}

double Metric::dual_norm(const Vector& g) const {
  require_dim(g, dim_, "dual_norm");
  if (dense_) return dense_->llt.matrixL().solve(g).norm();
  return std::sqrt(std::max(0.0, g.dot(solve_b(g))));
}

Vector Metric::solve_b(const Vector& rhs) const {
  require_dim(rhs, dim_, "solve_b");
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Vector::Zero(dim_);
  if (dense_) {
    Vector x = dense_->llt.solve(rhs);
    for (int refine = 0; refine < 2; ++refine) {
      const Vector r = rhs - dense_->B * x;
      if (r.norm() <= kSolveResidual * rhs_norm) break;
      x += dense_->llt.solve(r);
    }
    return x;
  }
  Vector x;
  const Vector& diag = implicit_->diagonal;
  const double rel = pcg(
      implicit_->apply, [&diag](const Vector& r) -> Vector { return r.cwiseQuotient(diag); }, rhs,
      x, 0.1 * kSolveResidual, 20 * dim_ + 100);
  if (rel > kSolveResidual) throw NumericalFailure("solve_b: CG did not converge", rel);
  return x;
}

Vector Metric::solve_shifted(const Matrix& H, double lambda, const Vector& rhs) const {
  require_dim(rhs, dim_, "solve_shifted");
  if (H.rows() != dim_ || H.cols() != dim_) throw InvalidArgument("solve_shifted: H must be d x d");
  if (!(lambda > 0.0)) throw InvalidArgument("solve_shifted: lambda must be positive");
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) return Vector::Zero(dim_);
  if (!dense_) {
    return solve_shifted([&H](const Vector& v) -> Vector { return H * v; }, lambda, rhs);
  }
  const Matrix K = std::sqrt(2.0) * lambda * dense_->B + 0.5 * (H + H.transpose());
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("solve_shifted: shifted system is not positive definite", INFINITY);
  }
  Vector x = llt.solve(rhs);
  double rel = 0.0;
  for (int refine = 0; refine < 3; ++refine) {
    const Vector r = rhs - K * x;
    rel = r.norm() / rhs_norm;
    if (rel <= kSolveResidual) return x;
    x += llt.solve(r);
  }
  rel = (rhs - K * x).norm() / rhs_norm;
  if (rel > kSolveResidual) throw NumericalFailure("solve_shifted: residual target missed", rel);
  return x;
}

Vector Metric::solve_shifted(const LinearOperator& H, double lambda, const Vector& rhs,
                             int max_iters) const {
  require_dim(rhs, dim_, "solve_shifted");
  if (!(lambda > 0.0)) throw InvalidArgument("solve_shifted: lambda must be positive");
  if (rhs.norm() == 0.0) return Vector::Zero(dim_);
  const double shift = std::sqrt(2.0) * lambda;
  auto apply = [&](const Vector& v) -> Vector { return shift * apply_b(v) + H(v); };
  LinearOperator precond;
  if (dense_) {
    precond = [&](const Vector& r) -> Vector { return dense_->llt.solve(r) / shift; };
  } else {
    const Vector& diag = implicit_->diagonal;
    precond = [&diag, shift](const Vector& r) -> Vector { return r.cwiseQuotient(shift * diag); };
  }
  if (max_iters <= 0) max_iters = 20 * dim_ + 200;
  Vector x;
  const double rel = pcg(apply, precond, rhs, x, 0.1 * kSolveResidual, max_iters);
  if (rel > kSolveResidual) {
    throw NumericalFailure("solve_shifted: CG stopped at relative residual " + std::to_string(rel),
                           rel);
  }
  return x;
}

const Matrix& Metric::matrix() const {
  if (!dense_) throw InvalidArgument("metric is operator-only");
  return dense_->B;
}

const Matrix& Metric::cholesky_lower() const {
  if (!dense_) throw InvalidArgument("metric is operator-only");
  return dense_->lower;
}

ShiftedPencil::ShiftedPencil(const Metric& metric, const Matrix& H) {
  const int d = metric.dim();
  if (H.rows() != d || H.cols() != d) throw InvalidArgument("ShiftedPencil: H must be d x d");
  lower_ = metric.cholesky_lower();
  const auto L = lower_.triangularView<Eigen::Lower>();
  Matrix M = L.solve(0.5 * (H + H.transpose()));
  M = L.solve(M.transpose()).eval();
  M = 0.5 * (M + M.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure("ShiftedPencil: eigendecomposition failed", INFINITY);
  }
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  basis_ = eig.eigenvectors();
}

Vector ShiftedPencil::to_spectral(const Vector& r) const {
  return basis_.transpose() * lower_.triangularView<Eigen::Lower>().solve(r);
}

Vector ShiftedPencil::from_spectral(const Vector& z) const {
  return lower_.transpose().triangularView<Eigen::Upper>().solve(basis_ * z);
}

Vector ShiftedPencil::solve(double sigma, const Vector& rhs) const {
  const Vector z = to_spectral(rhs);
  return from_spectral(z.cwiseQuotient((eigenvalues_.array() + sigma).matrix()));
}

}  // namespace fq
