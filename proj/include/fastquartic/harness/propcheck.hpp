#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fastquartic/fast_quartic.hpp"
#include "fastquartic/harness/generators.hpp"
#include "fastquartic/metric.hpp"
#include "fastquartic/quartic.hpp"

namespace fq::harness {

struct PropertyResult {
  PropertyResult(std::string property_name = {}) : name(std::move(property_name)) {}

  std::string name;
  bool passed = true;
  long checked = 0;
  long violations = 0;
  /// Largest observed violation (lhs - rhs of a "<=" check), or -inf if none.
  double worst = -1.0 / 0.0;
  std::string detail;

  /// Records lhs <= rhs + slack.
  void check(double lhs, double rhs, double slack);
  void merge(const PropertyResult& other);
};

nlohmann::json to_json(const PropertyResult& r);

/// f(y) - Phi_x(y) = (1/24) ||A(y - x)||_4^4 to 1e-10 relative.
PropertyResult check_taylor_identity(const StructuredQuartic& q, Rng& rng, int samples);
/// f(y) <= Omega_{x,B}(y) with L3 = 1, B = A'A.
PropertyResult check_model_upper_bound(const StructuredQuartic& q, const Metric& metric, Rng& rng,
                                       int samples);
/// f(y) >= f(x) + <grad f(x), y - x> + modulus ||y - x||_B^4 (convex instances).
PropertyResult check_uniform_convexity(const StructuredQuartic& q, const Metric& metric, Rng& rng,
                                       int samples, double modulus);
/// ||v||_4^4 >= ||v||_2^4 / n.
PropertyResult check_power_mean(int n, Rng& rng, int samples);
/// Omega(z) >= Omega(y) + <grad Omega(y), z - y> + (L3/12) ||z - y||_B^4.
PropertyResult check_model_uniform_convexity(const StructuredQuartic& q, const Metric& metric,
                                             Rng& rng, int samples);
/// |grad^3 f(y)[h]^3 - grad^3 f(x)[h]^3| <= L3 ||y - x||_B for ||h||_B = 1.
PropertyResult check_third_order_smoothness(const StructuredQuartic& q, const Metric& metric,
                                            Rng& rng, int samples);
/// The printed modulus n/72 must FAIL on n = 2, v = e1 (norm form and a
/// function-level instance), while 1/(72n) holds there. Passes iff both.
PropertyResult printed_modulus_counterexample();

/// Re-evaluates zeta at the returned rho from the state the step started in
/// and tests (1 - eps_rs) zeta <= rho <= (1 + eps_rs) zeta. Early exits pass.
bool recheck_rho_band(const StructuredQuartic& q, const Metric& metric, const StepOutcome& out,
                      const AccelState& before, const TheoryBudget& budget,
                      const SolverConfig& config);

/// Known-optimum audit of one run of the accelerated method (no restarts).
/// f_star is in eval_f terms. Checks per accepted step: rho band recheck,
/// psi envelope, D^2/(2A_k), A_k growth, rate envelope, B_k <= D^2/2,
/// ||v_k - x*||_B <= D, A_k vs sum rho^{-1/2}; and the early-exit guarantee.
std::vector<PropertyResult> audit_accelerated_run(const StructuredQuartic& q,
                                                  const Metric& metric, const Vector& x_star,
                                                  double f_star, SolverConfig config,
                                                  double slack = 1e-9);

/// Full seeded suite used by the propcheck command.
std::vector<PropertyResult> run_property_suite(std::uint64_t seed, int instances);

}  // namespace fq::harness
