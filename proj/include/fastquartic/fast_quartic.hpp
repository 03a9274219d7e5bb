#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fastquartic/aux_min.hpp"
#include "fastquartic/errors.hpp"
#include "fastquartic/metric.hpp"
#include "fastquartic/quartic.hpp"
#include "fastquartic/rho_search.hpp"
#include "fastquartic/types.hpp"

namespace fq {

struct TraceRecord {
  int k = 0;
  int epoch = 0;
  double f = 0.0;
  double dual_grad_norm = 0.0;
  double A_k = 0.0;
  double B_k = 0.0;
  double rho_k = 0.0;
  int aux_iterations = 0;
  int rho_evaluations = 0;
  /// accepted, early-exit-a or early-exit-b
  std::string branch;
  std::int64_t wall_nanos = 0;
  double psi_min = 0.0;
};

using TraceCallback = std::function<void(const TraceRecord&)>;

struct StepOutcome;
struct AccelState;
struct TheoryBudget;
/// Sees every step together with the state it started from and the budget in force.
using StepObserver =
    std::function<void(const StepOutcome&, const AccelState& before, const TheoryBudget&)>;

struct SolverConfig {
  double eps = 1e-8;
  std::optional<double> eps_aam;
  /// Overrides the lower end of the rho bracket.
  std::optional<double> rho_min;
  int max_epochs = 200;
  /// Outer iterations for solve_smooth; solve() uses the restart epoch length.
  int max_iterations = 500;
  std::optional<Vector> x0;
  /// Point used only to seed the diameter surrogate (4 ||x0 - x_ref||_B^2).
  std::optional<Vector> x_ref;
  /// Explicit seed for the diameter surrogate; the larger seed wins.
  double p_hat = 0.0;
  /// Lower bound on the relative rho-search band.
  double eps_rs_floor = 0.1;
  int max_bisections = kDefaultMaxBisections;
  int aux_max_iters = kAuxDefaultMaxIters;
  bool force_iterative = false;
  /// solve_smooth also stops once dual_norm(grad f) sqrt(P_hat) <= eps.
  bool gradient_stop = true;
  std::optional<SmoothnessConstants> constants;
  TraceCallback on_trace;
  StepObserver on_step;
};

/// Computable stand-ins for the problem constants that parameterize the method.
struct TheoryBudget {
  double l3 = 1.0;
  double mu4 = 1.0;
  double eps = 0.0;
  double P_hat = 0.0;
  double G_hat = 0.0;
  double T_hat = 0.0;
  double Q_hat = 0.0;
  double rho_init_minus = 0.0;
  double rho_init_plus = 0.0;
  double eps_fs = 0.5;
  double eps_rs = 0.5;
  double eps_rs_floor = 0.1;
  double eps_aam = kAuxEpsFloor;
  /// Absolute accept band of the rho search under the current surrogates.
  double delta = 0.0;

  static TheoryBudget initialize(const StructuredQuartic& q, const Metric& metric,
                                 const Vector& x0, const SolverConfig& config);
  /// Grows P_hat and G_hat; rho_init_minus and eps_aam stay fixed.
  void observe(double displacement_sq, double grad_dual_norm_sq);
  void refresh();
};

struct AccelState {
  Vector x0;
  Vector x;
  Vector v;
  double f_x = 0.0;
  double A = 0.0;
  double B = 0.0;
  Vector psi_lin;
  double psi_scalar = 0.0;
  int k = 0;

  static AccelState start(const StructuredQuartic& q, const Vector& x0);
  /// psi(z) = 1/2 ||z - x0||_B^2 + psi_scalar + <psi_lin, z>
  double psi(const Metric& metric, const Vector& z) const;
};

enum class StepKind { accepted, early_exit_a, early_exit_b };

const char* step_kind_name(StepKind kind);

struct StepOutcome {
  StepKind kind = StepKind::accepted;
  /// Updated on acceptance, unchanged on early exit.
  AccelState state;
  Vector x_result;
  double f_result = 0.0;
  Vector grad_result;
  double rho = 0.0;
  double zeta = 0.0;
  double a = 0.0;
  double tau = 1.0;
  Vector y;
  double r_hat = 0.0;
  /// Certified bound on |zeta_hat - zeta| at the probe, used by branch (b).
  double probe_uncertainty = 0.0;
  double eps_rs = 0.0;
  int aux_iterations = 0;
  int rho_evaluations = 0;
  int linear_solves = 0;
  std::vector<BisectionLogEntry> search_log;
};

/// One iteration of the accelerated method from `state`.
StepOutcome step(const StructuredQuartic& q, const Metric& metric, const AccelState& state,
                 TheoryBudget& budget, const SolverConfig& config);

struct SolveReport {
  Vector x;
  double f_final = 0.0;
  double certified_gap = 0.0;
  int outer_iterations = 0;
  int aux_iterations_total = 0;
  int linear_solves_total = 0;
  std::int64_t wall_nanos = 0;
  /// gap-met, early-exit-a, early-exit-b, epoch-cap or failure
  std::string exit_reason;
  int epochs = 0;
  std::vector<TraceRecord> trace;
};

/// Upper bound on f(x) - min f from the degree-4 uniform convexity:
/// (3/4) mu4^{-1/3} g^{4/3} for g = dual_norm(grad f(x)).
double uniform_convexity_gap(double gradient_dual_norm, double mu4);

/// Restart epoch length ceil((512 L3 / (3 mu4))^{1/5}).
int restart_epoch_length(const SmoothnessConstants& constants);

/// The accelerated method without restarts.
SolveReport solve_smooth(const StructuredQuartic& q, const Metric& metric,
                         const SolverConfig& config);

class EpochCapExceeded : public ConvergenceFailure {
 public:
  EpochCapExceeded(const std::string& what, SolveReport report)
      : ConvergenceFailure(what, report.x, report.certified_gap), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

/// Restarted method; stops when the uniform-convexity gap certificate is <= eps.
/// Throws EpochCapExceeded after max_epochs.
SolveReport solve(const StructuredQuartic& q, const Metric& metric, const SolverConfig& config);

}  // namespace fq
