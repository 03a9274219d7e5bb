#pragma once

#include <cstdint>

#include "fastquartic/metric.hpp"
#include "fastquartic/quartic.hpp"

namespace fq::harness {

struct ReferenceSolution {
  Vector x_star;
  double f_star = 0.0;
  double grad_dual_norm = 0.0;
  int iterations = 0;
};

/// Damped Newton with Armijo backtracking on (H + mu B) p = -grad f. Stops
/// when dual_norm(grad f) <= tol; throws OracleFailure if it stalls.
ReferenceSolution reference_newton(const StructuredQuartic& q, const Metric& metric,
                                   const Vector& x0, double tol = 1e-11, int max_iters = 500);

struct BaselineResult {
  Vector x;
  double f = 0.0;
  double grad_dual_norm = 0.0;
  int iterations = 0;
  std::int64_t wall_nanos = 0;
  bool converged = false;
};

/// Accelerated gradient with steps B^{-1} grad f / L_k, backtracking on L_k and
/// gradient-based restarts. Stops when the uniform-convexity gap bound is <= eps.
BaselineResult agd_baseline(const StructuredQuartic& q, const Metric& metric, const Vector& x0,
                            double eps, double mu4, int max_iters = 100000);

}  // namespace fq::harness
