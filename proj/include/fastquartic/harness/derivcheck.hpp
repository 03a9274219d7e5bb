#pragma once

#include <cstdint>
#include <vector>

#include "fastquartic/quartic.hpp"

namespace fq::harness {

struct DerivTolerances {
  double grad = 1e-6;
  double hess = 1e-6;
  double third = 1e-5;
  double fourth = 1e-3;
};

/// Errors are ||analytic - numeric||_inf / max(1, ||numeric||_inf).
struct DerivCheckResult {
  double grad_error = 0.0;
  double hess_error = 0.0;
  double third_error = 0.0;
  double fourth_error = 0.0;

  bool passed(const DerivTolerances& tol) const;
};

/// Central differences with step max(1e-5, 1e-5 ||x||_inf): gradient from f,
/// Hessian columns from the gradient, third derivative along h from the
/// Hessian. The fourth form is compared with the exact five-point fourth
/// difference of f along h.
DerivCheckResult check_derivatives(const StructuredQuartic& q, const Vector& x, const Vector& h);

struct DerivSuiteResult {
  int instances = 0;
  DerivCheckResult worst;
  bool passed = false;
};

/// Random instances with d <= 8, n <= 16 and coefficients in [-1, 1].
DerivSuiteResult run_derivative_suite(std::uint64_t seed, int instances,
                                      const DerivTolerances& tol = {});

/// All checks of one given problem at `points` seeded random points.
DerivSuiteResult check_problem_derivatives(const StructuredQuartic& q, std::uint64_t seed,
                                           int points, const DerivTolerances& tol = {});

}  // namespace fq::harness
