#include "fastquartic/harness/reference.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "fastquartic/errors.hpp"
#include "fastquartic/fast_quartic.hpp"

namespace fq::harness {

namespace {

Vector newton_direction(const StructuredQuartic& q, const Metric& metric, const Vector& x,
                        const Vector& g, double mu) {
  if (metric.is_dense()) {
    const Matrix K = hess_matrix(q, x) + mu * metric.matrix();
    Eigen::LLT<Matrix> llt(K);
    if (llt.info() == Eigen::Success) {
      Vector p = llt.solve(-g);
      for (int refine = 0; refine < 2; ++refine) p += llt.solve(-g - K * p);
      return p;
    }
    Eigen::LDLT<Matrix> ldlt(K);
    return ldlt.solve(-g);
  }
  return metric.solve_shifted(hess_operator(q, x), mu / std::sqrt(2.0), -g);
}

}  // namespace

ReferenceSolution reference_newton(const StructuredQuartic& q, const Metric& metric,
                                   const Vector& x0, double tol, int max_iters) {
  if (!(tol >= 1e-13)) throw InvalidArgument("reference_newton: tol must be >= 1e-13");
  Vector x = x0;
  double f = eval_f(q, x);
  Vector g = grad_f(q, x);
  double gn = metric.dual_norm(g);
  int stalled = 0;
  for (int it = 0; it < max_iters; ++it) {
    if (gn <= tol) return {x, f, gn, it};
    // Tiny regularization keeps the system definite where the Hessian is singular.
    const double mu = std::min(1e-3, 1e-2 * gn);
    const Vector p = newton_direction(q, metric, x, g, mu);
    const double slope = g.dot(p);
    double t = 1.0;
    bool moved = false;
    for (int back = 0; back < 60; ++back, t *= 0.5) {
      const Vector xt = x + t * p;
      const double ft = eval_f(q, xt);
      const Vector gt = grad_f(q, xt);
      const double gnt = metric.dual_norm(gt);
      // Near the optimum f changes only at roundoff level; accept a
      // decrease of the gradient instead.
      const bool armijo = ft <= f + 1e-4 * t * slope;
      const bool flat = std::abs(ft - f) <= 1e-13 * (1.0 + std::abs(f)) && gnt < gn;
      if (armijo || flat) {
        stalled = (gnt < 0.999 * gn) ? 0 : stalled + 1;
        x = xt;
        f = ft;
        g = gt;
        gn = gnt;
        moved = true;
        break;
      }
    }
    if (!moved) ++stalled;
    if (stalled >= 20) {
      throw OracleFailure("reference_newton: line search stagnated at gradient dual norm " +
                          std::to_string(gn));
    }
  }
  if (gn <= tol) return {x, f, gn, max_iters};
  throw OracleFailure("reference_newton: no convergence, gradient dual norm " +
                      std::to_string(gn));
}

BaselineResult agd_baseline(const StructuredQuartic& q, const Metric& metric, const Vector& x0,
                            double eps, double mu4, int max_iters) {
  const auto start = std::chrono::steady_clock::now();
  BaselineResult out;
  Vector x = x0;
  Vector x_prev = x0;
  double f = eval_f(q, x);
  double L = 1.0;
  double theta = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    const Vector y = x + ((theta - 1.0) / theta_next) * (x - x_prev);
    const double fy = eval_f(q, y);
    const Vector gy = grad_f(q, y);
    const Vector dir = metric.solve_b(gy);
    const double gy2 = gy.dot(dir);
    Vector x_next;
    double f_next = 0.0;
    for (int back = 0; back < 100; ++back) {
      x_next = y - dir / L;
      f_next = eval_f(q, x_next);
      if (f_next <= fy - 0.5 * gy2 / L + 1e-14 * std::abs(fy)) break;
      L *= 2.0;
    }
    L *= 0.9;
    x_prev = x;
    if (f_next > f) {
      // restart the momentum when the objective goes up
      theta = 1.0;
      x_prev = x;
      continue;
    }
    x = x_next;
    f = f_next;
    theta = theta_next;
    out.iterations = it + 1;
    const double gn = metric.dual_norm(grad_f(q, x));
    if (uniform_convexity_gap(gn, mu4) <= eps) {
      out.converged = true;
      break;
    }
  }
  out.x = x;
  out.f = f;
  out.grad_dual_norm = metric.dual_norm(grad_f(q, x));
  out.wall_nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

}  // namespace fq::harness
