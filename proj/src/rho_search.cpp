#include "fastquartic/rho_search.hpp"

#include <cmath>
#include <sstream>

namespace fq {

TauWeight tau_of_rho(double A_k, double l3, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("tau_of_rho: rho must be positive");
  if (!(A_k >= 0.0)) throw InvalidArgument("tau_of_rho: A_k must be non-negative");
  if (!(l3 > 0.0)) throw InvalidArgument("tau_of_rho: L3 must be positive");
  const double root = std::sqrt(1.0 + 4.0 * l3 * A_k * rho);
  return {2.0 / (1.0 + root), (1.0 + root) / (2.0 * l3 * rho)};
}

ZetaProbe zeta_hat(const StructuredQuartic& q, const Metric& metric, const Vector& x_k,
                   const Vector& v_k, double A_k, double rho, const AuxOptions& aux) {
  const TauWeight tw = tau_of_rho(A_k, aux.l3, rho);
  ZetaProbe p;
  p.rho = rho;
  p.tau = tw.tau;
  p.a_next = tw.a;
  p.y = (1.0 - tw.tau) * x_k + tw.tau * v_k;
  p.aux = approx_aux_min(q, metric, p.y, aux);
  p.x_next = p.aux.x_next;
  p.zeta = p.aux.displacement_b_norm * p.aux.displacement_b_norm;
  return p;
}

double rho_search_tolerance(double eps_aam, double l3, double p_hat) {
  return 6.0 * std::pow(eps_aam / l3, 0.25) * std::sqrt(p_hat) + std::sqrt(12.0 * eps_aam / l3);
}

bool rho_condition_holds(double rho, double zeta, double eps_rs) {
  return (1.0 - eps_rs) * zeta <= rho && rho <= (1.0 + eps_rs) * zeta;
}

RhoSearchResult rho_search(const ZetaEvaluator& zeta, double rho_lo, double rho_hi,
                           const RhoSearchOptions& options) {
  if (!(rho_lo > 0.0) || !(rho_lo <= rho_hi)) {
    throw InvalidArgument("rho_search: need 0 < rho_lo <= rho_hi");
  }
  if (!(options.eps_rs > 0.0) || options.eps_rs >= 1.0) {
    throw InvalidArgument("rho_search: eps_rs must lie in (0, 1)");
  }
  RhoSearchResult out;
  std::optional<ZetaProbe> lo_probe = options.lo_probe;
  if (lo_probe && lo_probe->rho != rho_lo) lo_probe.reset();

  auto record = [&](const ZetaProbe& p, const char* branch) {
    BisectionLogEntry e{p.rho, p.zeta, rho_lo, rho_hi, branch};
    out.log.push_back(e);
    if (options.on_evaluation) options.on_evaluation(e);
  };

  std::optional<ZetaProbe> accepted;
  for (int it = 0; it < options.max_bisections; ++it) {
    const double mid = 0.5 * (rho_lo + rho_hi);
    if (mid <= rho_lo || mid >= rho_hi) break;
    ZetaProbe p = zeta(mid);
    ++out.evaluations;
    const bool in_band = rho_condition_holds(mid, p.zeta, options.eps_rs) ||
                         (options.delta > 0.0 && std::abs(mid - p.zeta) <= options.delta);
    if (in_band) {
      record(p, "accept");
      accepted = std::move(p);
      break;
    }
    if (mid > p.zeta) {
      rho_hi = mid;
      record(p, "upper");
    } else {
      rho_lo = mid;
      record(p, "lower");
      lo_probe = std::move(p);
    }
  }

  if (!accepted) {
    if (!lo_probe) {
      lo_probe = zeta(rho_lo);
      ++out.evaluations;
    }
    record(*lo_probe, "exhausted");
    accepted = std::move(lo_probe);
  }

  out.bracket_final = {rho_lo, rho_hi};
  out.rho_k = accepted->rho;
  out.a_next = accepted->a_next;
  out.x_next = accepted->x_next;
  out.probe = std::move(*accepted);
  if (!rho_condition_holds(out.rho_k, out.probe.zeta, options.eps_rs)) {
    std::ostringstream msg;
    msg << "rho_search: returned rho " << out.rho_k << " outside the band around zeta "
        << out.probe.zeta << " (eps_rs " << options.eps_rs << ", " << out.evaluations
        << " evaluations)";
    throw SearchFailure(msg.str(), out.log);
  }
  return out;
}

RhoSearchResult rho_search(const StructuredQuartic& q, const Metric& metric, const Vector& x_k,
                           const Vector& v_k, double A_k, double rho_lo, double rho_hi,
                           const AuxOptions& aux, const RhoSearchOptions& options) {
  return rho_search(
      [&](double rho) { return zeta_hat(q, metric, x_k, v_k, A_k, rho, aux); }, rho_lo, rho_hi,
      options);
}

}  // namespace fq
