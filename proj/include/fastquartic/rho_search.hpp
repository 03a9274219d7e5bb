#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fastquartic/aux_min.hpp"
#include "fastquartic/errors.hpp"
#include "fastquartic/metric.hpp"
#include "fastquartic/quartic.hpp"
#include "fastquartic/types.hpp"

namespace fq {

inline constexpr int kDefaultMaxBisections = 128;

struct TauWeight {
  double tau = 1.0;
  /// a with a^2 = (A_k + a) / (L3 rho)
  double a = 0.0;
};

/// tau = 2 / (1 + sqrt(1 + 4 L3 A_k rho)) and the matching step weight.
TauWeight tau_of_rho(double A_k, double l3, double rho);

/// Everything produced by one evaluation of the displacement map at rho.
struct ZetaProbe {
  double rho = 0.0;
  double zeta = 0.0;
  double tau = 1.0;
  double a_next = 0.0;
  Vector y;
  Vector x_next;
  AuxResult aux;
};

/// y = (1 - tau) x_k + tau v_k, one approximate tensor step from y, and the
/// squared B-displacement of that step.
ZetaProbe zeta_hat(const StructuredQuartic& q, const Metric& metric, const Vector& x_k,
                   const Vector& v_k, double A_k, double rho, const AuxOptions& aux);

/// Accept band used inside the loop: 6 (eps/L3)^{1/4} P^{1/2} + (12 eps/L3)^{1/2}.
double rho_search_tolerance(double eps_aam, double l3, double p_hat);

using ZetaEvaluator = std::function<ZetaProbe(double rho)>;
using BisectionCallback = std::function<void(const BisectionLogEntry&)>;

struct RhoSearchOptions {
  double eps_rs = 0.1;
  int max_bisections = kDefaultMaxBisections;
  /// Absolute accept band |rho - zeta| <= delta, tried in addition to the
  /// relative band. 0 disables it.
  double delta = 0.0;
  /// Known evaluation at rho_lo, reused on bracket exhaustion.
  std::optional<ZetaProbe> lo_probe;
  BisectionCallback on_evaluation;
};

struct RhoSearchResult {
  double rho_k = 0.0;
  Vector x_next;
  double a_next = 0.0;
  int evaluations = 0;
  std::pair<double, double> bracket_final{0.0, 0.0};
  ZetaProbe probe;
  std::vector<BisectionLogEntry> log;
};

/// Bisection for rho with (1 - eps_rs) zeta(rho) <= rho <= (1 + eps_rs) zeta(rho)
/// over [rho_lo, rho_hi]. Throws SearchFailure with the full log if the
/// returned pair does not satisfy that band.
RhoSearchResult rho_search(const ZetaEvaluator& zeta, double rho_lo, double rho_hi,
                           const RhoSearchOptions& options);

RhoSearchResult rho_search(const StructuredQuartic& q, const Metric& metric, const Vector& x_k,
                           const Vector& v_k, double A_k, double rho_lo, double rho_hi,
                           const AuxOptions& aux, const RhoSearchOptions& options);

/// True when (1 - eps_rs) zeta <= rho <= (1 + eps_rs) zeta.
bool rho_condition_holds(double rho, double zeta, double eps_rs);

}  // namespace fq
