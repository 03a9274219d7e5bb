#include "fastquartic/harness/derivcheck.hpp"

#include <algorithm>
#include <cmath>

#include "fastquartic/harness/generators.hpp"

namespace fq::harness {

namespace {

double rel_error(const Vector& analytic, const Vector& numeric) {
  return (analytic - numeric).lpNorm<Eigen::Infinity>() /
         std::max(1.0, numeric.lpNorm<Eigen::Infinity>());
}

void merge_worst(DerivCheckResult& worst, const DerivCheckResult& r) {
  worst.grad_error = std::max(worst.grad_error, r.grad_error);
  worst.hess_error = std::max(worst.hess_error, r.hess_error);
  worst.third_error = std::max(worst.third_error, r.third_error);
  worst.fourth_error = std::max(worst.fourth_error, r.fourth_error);
}

}  // namespace

bool DerivCheckResult::passed(const DerivTolerances& tol) const {
  return grad_error <= tol.grad && hess_error <= tol.hess && third_error <= tol.third &&
         fourth_error <= tol.fourth;
}

DerivCheckResult check_derivatives(const StructuredQuartic& q, const Vector& x, const Vector& h) {
  const int d = q.dim();
  const double step = std::max(1e-5, 1e-5 * x.lpNorm<Eigen::Infinity>());
  DerivCheckResult r;

  Vector num_grad(d);
  Matrix num_hess(d, d);
  for (int i = 0; i < d; ++i) {
    Vector e = Vector::Zero(d);
    e[i] = step;
    num_grad[i] = (eval_f(q, x + e) - eval_f(q, x - e)) / (2.0 * step);
    num_hess.col(i) = (grad_f(q, x + e) - grad_f(q, x - e)) / (2.0 * step);
  }
  r.grad_error = rel_error(grad_f(q, x), num_grad);
  const Matrix H = hess_matrix(q, x);
  r.hess_error = (H - num_hess).lpNorm<Eigen::Infinity>() /
                 std::max(1.0, num_hess.lpNorm<Eigen::Infinity>());

  const Vector num_third =
      (hess_apply(q, x + step * h, h) - hess_apply(q, x - step * h, h)) / (2.0 * step);
  r.third_error = rel_error(third_apply(q, x, h), num_third);

  // Exact for a quartic: sum_j (-1)^j C(4,j) f(x + (2-j) t h) = t^4 grad^4 f[h]^4.
  const double t = 0.1;
  const double fourth_diff = eval_f(q, x + 2 * t * h) - 4.0 * eval_f(q, x + t * h) +
                             6.0 * eval_f(q, x) - 4.0 * eval_f(q, x - t * h) +
                             eval_f(q, x - 2 * t * h);
  const double numeric = fourth_diff / (t * t * t * t);
  r.fourth_error = std::abs(fourth_form(q, h) - numeric) / std::max(1.0, std::abs(numeric));
  return r;
}

DerivSuiteResult run_derivative_suite(std::uint64_t seed, int instances,
                                      const DerivTolerances& tol) {
  Rng rng(seed);
  std::uniform_int_distribution<int> dim(1, 8);
  DerivSuiteResult out;
  for (int k = 0; k < instances; ++k) {
    const int d = dim(rng);
    const int n = std::uniform_int_distribution<int>(d, 16)(rng);
    const StructuredQuartic q = random_quartic(rng, d, n);
    merge_worst(out.worst, check_derivatives(q, uniform_vector(rng, d), uniform_vector(rng, d)));
    ++out.instances;
  }
  out.passed = out.worst.passed(tol);
  return out;
}

DerivSuiteResult check_problem_derivatives(const StructuredQuartic& q, std::uint64_t seed,
                                           int points, const DerivTolerances& tol) {
  Rng rng(seed);
  DerivSuiteResult out;
  for (int k = 0; k < points; ++k) {
    merge_worst(out.worst,
                check_derivatives(q, uniform_vector(rng, q.dim()), uniform_vector(rng, q.dim())));
    ++out.instances;
  }
  out.passed = out.worst.passed(tol);
  return out;
}

}  // namespace fq::harness
