#pragma once

#include <functional>

#include "fastquartic/metric.hpp"
#include "fastquartic/quartic.hpp"
#include "fastquartic/types.hpp"

namespace fq {

inline constexpr double kAuxEpsFloor = 1e-14;
inline constexpr int kAuxDefaultMaxIters = 200;

struct AuxIterationRecord {
  int t = 0;
  double model_value = 0.0;
  double certified_gap = 0.0;
  double gradient_dual_norm = 0.0;
};

using AuxCallback = std::function<void(const AuxIterationRecord&)>;

struct AuxOptions {
  double eps_aam = kAuxEpsFloor;
  int max_iters = kAuxDefaultMaxIters;
  double l3 = 1.0;
  /// Route shifted solves through conjugate gradients even for a dense metric.
  bool force_iterative = false;
  AuxCallback on_iteration;
};

/// Outcome of approximately minimizing the model Omega_{y,B}.
struct AuxResult {
  Vector x_next;
  int iterations = 0;
  /// Certified upper bound on Omega(x_next) - min Omega.
  double final_gap_bound = 0.0;
  double model_value = 0.0;
  double displacement_b_norm = 0.0;
  double gradient_dual_norm = 0.0;
  /// Certified upper bound on ||x_next - T_B(y)||_B.
  double distance_bound = 0.0;
  int linear_solves = 0;
};

/// One step of the relative-smoothness iteration: the minimizer s of
///   <c, s> + (1/sqrt 2) s'Hs + (sqrt 2 L3 / 4) ||s||_B^4.
struct InnerStep {
  Vector step;
  /// Consistent value of ||s||_B^2.
  double rho = 0.0;
  /// dual_norm(stationarity residual) / dual_norm(c).
  double relative_residual = 0.0;
  int linear_solves = 0;
  int root_iterations = 0;
};

/// Gap certificate (3/4) (12/L3)^{1/3} g^{4/3} from the uniform convexity of
/// the model, for g the dual norm of the model gradient.
double model_gap_certificate(double gradient_dual_norm, double l3);

/// Certified bound on the B-distance from a point with model-gradient dual
/// norm g and B-displacement r from the model center to the exact model
/// minimizer. Combines the degree-4 growth bound (6g/L3)^{1/3} with the local
/// strong convexity (L3/2) r^2 of the model away from its center.
double model_distance_bound(double gradient_dual_norm, double displacement, double l3);

/// c_t = grad Omega_{y,B}(y + h).
Vector subproblem_gradient(const StructuredQuartic& q, const Metric& metric, const Vector& y,
                           const Vector& h, double l3);

/// Dense route: one pencil factorization, then O(d^2) per scalar trial.
InnerStep solve_inner_step(const Metric& metric, const Matrix& H, const Vector& c, double l3);
InnerStep solve_inner_step(const Metric& metric, const ShiftedPencil& pencil,
                           const LinearOperator& H, const Vector& c, double l3);
/// Operator route: every scalar trial is a conjugate-gradient shifted solve.
InnerStep solve_inner_step(const Metric& metric, const LinearOperator& H, const Vector& c,
                           double l3);

/// Approximate tensor step from y. Throws ConvergenceFailure (best iterate,
/// certified gap) when max_iters passes end before the certificate reaches
/// eps_aam.
AuxResult approx_aux_min(const StructuredQuartic& q, const Metric& metric, const Vector& y,
                         const AuxOptions& options);

}  // namespace fq
