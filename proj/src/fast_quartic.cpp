#include "fastquartic/fast_quartic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

namespace fq {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kWeightTol = 1e-12;
constexpr double kInvariantTol = 1e-9;
constexpr int kMaxBracketDoublings = 200;
constexpr double kRoundoffFactor = 64.0 * 2.220446049250313e-16;
constexpr double kAuxRoundoffFactor = 1024.0 * 2.220446049250313e-16;

// Size of the terms summed in f(x); values closer than a small multiple of
// this are indistinguishable.
double roundoff_band(const StructuredQuartic& q, const Vector& x) {
  const double quad = x.dot(q.G() * x);
  const double quart = fourth_form(q, x) / 24.0;
  return kRoundoffFactor *
         (1.0 + std::abs(q.c().dot(x)) + std::abs(quad) + std::abs(q.T().form(x)) + quart);
}

// Sum of the dual norms of the separate gradient terms at x. Model gradients
// near x carry absolute roundoff of about machine epsilon times this.
double gradient_term_scale(const StructuredQuartic& q, const Metric& metric, const Vector& x) {
  const Vector ax = q.apply_A(x);
  const Vector quart = q.apply_At(ax.array().cube().matrix()) / 6.0;
  return metric.dual_norm(q.c()) + metric.dual_norm(q.G_sym() * x) +
         metric.dual_norm(3.0 * q.T().contract2(x, x)) + metric.dual_norm(quart);
}

// Lower f wins; inside the roundoff band the smaller gradient wins.
bool improves(double f_new, double g_new, double f_old, double g_old, double band) {
  if (f_new < f_old - band) return true;
  return f_new <= f_old + band && g_new < g_old;
}

std::int64_t nanos_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

template <class Body>
auto tag_failures(int k, Body&& body) {
  const std::string at = "iteration " + std::to_string(k) + ": ";
  try {
    return body();
  } catch (const SearchFailure& e) {
    throw SearchFailure(at + e.what(), e.log());
  } catch (const ConvergenceFailure& e) {
    throw ConvergenceFailure(at + e.what(), e.best_iterate(), e.certified_gap());
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(at + e.what(), e.residual());
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(at + e.what());
  }
}

double probe_uncertainty(const ZetaProbe& p) {
  const double beta = p.aux.distance_bound;
  return 2.0 * beta * p.aux.displacement_b_norm + beta * beta;
}

struct RunContext {
  int epoch = 0;
  int k_offset = 0;
  Clock::time_point start;
};

SolveReport run_accelerated(const StructuredQuartic& q, const Metric& metric,
                            const SolverConfig& config, const RunContext& ctx) {
  if (!(config.eps > 0.0)) throw InvalidArgument("solver: eps must be positive");
  if (config.max_iterations < 0) throw InvalidArgument("solver: max_iterations must be >= 0");
  const Vector x0 = config.x0 ? *config.x0 : Vector::Zero(q.dim());
  if (x0.size() != q.dim()) throw InvalidArgument("solver: x0 has the wrong dimension");

  TheoryBudget budget = TheoryBudget::initialize(q, metric, x0, config);
  AccelState state = AccelState::start(q, x0);

  SolveReport report;
  Vector best = x0;
  double best_f = state.f_x;
  double best_g = metric.dual_norm(grad_f(q, x0));
  ++report.linear_solves_total;

  auto stop_now = [&](double g) {
    if (uniform_convexity_gap(g, budget.mu4) <= config.eps) return true;
    return config.gradient_stop && g * std::sqrt(budget.P_hat) <= config.eps;
  };

  if (stop_now(best_g)) {
    report.exit_reason = "gap-met";
  } else {
    report.exit_reason = "epoch-cap";
    for (int it = 0; it < config.max_iterations; ++it) {
      const int k = ctx.k_offset + it;
      const AccelState before = state;
      StepOutcome out = tag_failures(k, [&] { return step(q, metric, state, budget, config); });
      ++report.outer_iterations;
      report.aux_iterations_total += out.aux_iterations;
      report.linear_solves_total += out.linear_solves;

      const double g = metric.dual_norm(out.grad_result);
      ++report.linear_solves_total;
      if (improves(out.f_result, g, best_f, best_g, roundoff_band(q, best))) {
        best_f = out.f_result;
        best = out.x_result;
        best_g = g;
      }

      TraceRecord rec;
      rec.k = k + 1;
      rec.epoch = ctx.epoch;
      rec.f = out.f_result;
      rec.dual_grad_norm = g;
      rec.A_k = out.state.A;
      rec.B_k = out.state.B;
      rec.rho_k = out.rho;
      rec.aux_iterations = out.aux_iterations;
      rec.rho_evaluations = out.rho_evaluations;
      rec.branch = step_kind_name(out.kind);
      rec.wall_nanos = nanos_since(ctx.start);
      rec.psi_min = out.state.psi(metric, out.state.v);
      report.trace.push_back(rec);
      if (config.on_trace) config.on_trace(rec);
      if (config.on_step) config.on_step(out, before, budget);

      if (out.kind != StepKind::accepted) {
        report.exit_reason = step_kind_name(out.kind);
        break;
      }
      state = std::move(out.state);
      if (stop_now(g)) {
        report.exit_reason = "gap-met";
        break;
      }
    }
  }

  report.x = std::move(best);
  report.f_final = best_f;
  report.certified_gap = uniform_convexity_gap(best_g, budget.mu4);
  report.epochs = 1;
  report.wall_nanos = nanos_since(ctx.start);
  return report;
}

}  // namespace

const char* step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::accepted:
      return "accepted";
    case StepKind::early_exit_a:
      return "early-exit-a";
    case StepKind::early_exit_b:
      return "early-exit-b";
  }
  return "unknown";
}

TheoryBudget TheoryBudget::initialize(const StructuredQuartic& q, const Metric& metric,
                                      const Vector& x0, const SolverConfig& config) {
  if (!(config.eps > 0.0)) throw InvalidArgument("budget: eps must be positive");
  const SmoothnessConstants sc =
      config.constants ? *config.constants : SmoothnessConstants::for_quartic(q);
  TheoryBudget b;
  b.l3 = sc.l3;
  b.mu4 = sc.mu4;
  b.eps = config.eps;
  b.eps_rs_floor = config.eps_rs_floor;

  const double g0 = metric.dual_norm(grad_f(q, x0));
  double seed = config.p_hat;
  if (config.x_ref) {
    const double r = metric.b_norm(x0 - *config.x_ref);
    seed = std::max(seed, 4.0 * r * r);
  } else {
    // ||x0 - x*||_B^3 <= 4 g0 / mu4 by uniform convexity
    const double radius = std::cbrt(4.0 * g0 / sc.mu4);
    seed = std::max(seed, 4.0 * radius * radius);
  }
  b.P_hat = std::max(seed, 1e-30);
  b.G_hat = g0 * g0;

  b.rho_init_minus = config.rho_min ? *config.rho_min : config.eps / (2.0 * b.l3 * b.P_hat);
  b.rho_init_minus = std::min({b.rho_init_minus, 0.5, 0.5 * b.P_hat});
  if (!(b.rho_init_minus > 0.0)) throw InvalidArgument("budget: rho_min must be positive");
  b.refresh();

  if (config.eps_aam) {
    if (!(*config.eps_aam > 0.0)) throw InvalidArgument("budget: eps_aam must be positive");
    b.eps_aam = *config.eps_aam;
  } else {
    const double cap_rs = std::pow(b.eps_rs * b.eps_rs / (100.0 * b.Q_hat), 4.0);
    const double cap_fs =
        std::pow(b.eps_fs * b.rho_init_minus / (b.Q_hat * (1.0 + b.eps_fs)), 4.0);
    const double roundoff =
        model_gap_certificate(kAuxRoundoffFactor * gradient_term_scale(q, metric, x0), b.l3);
    b.eps_aam = std::max({kAuxEpsFloor, roundoff, std::min({cap_rs, cap_fs, 0.5})});
  }
  b.delta = rho_search_tolerance(b.eps_aam, b.l3, b.P_hat);
  return b;
}

void TheoryBudget::observe(double displacement_sq, double grad_dual_norm_sq) {
  P_hat = std::max(P_hat, displacement_sq);
  G_hat = std::max(G_hat, grad_dual_norm_sq);
  refresh();
}

void TheoryBudget::refresh() {
  rho_init_plus = std::max(P_hat, rho_init_minus);
  eps_fs = G_hat > 0.0
               ? std::min(3.0 * l3 * l3 * P_hat * rho_init_minus / (32.0 * G_hat), 0.5)
               : 0.5;
  T_hat = G_hat / l3 + 0.01;
  const double theory_rs =
      std::min({3.0 * l3 * rho_init_minus * P_hat * P_hat / (16.0 * T_hat), rho_init_minus, 0.5});
  eps_rs = std::max(theory_rs, eps_rs_floor);
  Q_hat = 6.0 * std::sqrt(P_hat) / std::pow(l3, 0.25) + 5.0 / std::sqrt(l3);
  delta = rho_search_tolerance(eps_aam, l3, P_hat);
}

AccelState AccelState::start(const StructuredQuartic& q, const Vector& x0) {
  AccelState s;
  s.x0 = x0;
  s.x = x0;
  s.v = x0;
  s.f_x = eval_f(q, x0);
  s.psi_lin = Vector::Zero(x0.size());
  return s;
}

double AccelState::psi(const Metric& metric, const Vector& z) const {
  const double r = metric.b_norm(z - x0);
  return 0.5 * r * r + psi_scalar + psi_lin.dot(z);
}

StepOutcome step(const StructuredQuartic& q, const Metric& metric, const AccelState& state,
                 TheoryBudget& budget, const SolverConfig& config) {
  const double L = budget.l3;
  AuxOptions aux;
  aux.eps_aam = budget.eps_aam;
  aux.max_iters = config.aux_max_iters;
  aux.l3 = L;
  aux.force_iterative = config.force_iterative;

  StepOutcome out;
  out.state = state;
  out.eps_rs = budget.eps_rs;
  auto evaluate = [&](double rho) {
    ZetaProbe p = zeta_hat(q, metric, state.x, state.v, state.A, rho, aux);
    out.aux_iterations += p.aux.iterations;
    out.linear_solves += p.aux.linear_solves;
    ++out.rho_evaluations;
    return p;
  };

  const double rho_lo = budget.rho_init_minus;
  ZetaProbe lo = evaluate(rho_lo);
  out.probe_uncertainty = probe_uncertainty(lo);

  auto finish_exit = [&](StepKind kind) {
    out.kind = kind;
    out.rho = rho_lo;
    out.zeta = lo.zeta;
    out.a = lo.a_next;
    out.tau = lo.tau;
    out.y = lo.y;
    out.r_hat = lo.aux.displacement_b_norm;
    out.x_result = lo.x_next;
    out.f_result = eval_f(q, out.x_result);
    out.grad_result = grad_f(q, out.x_result);
    return out;
  };
  if (rho_lo > (1.0 + budget.eps_fs) * lo.zeta) return finish_exit(StepKind::early_exit_a);
  if (rho_lo > lo.zeta - out.probe_uncertainty) return finish_exit(StepKind::early_exit_b);

  double rho_hi = budget.rho_init_plus;
  ZetaProbe hi = evaluate(rho_hi);
  for (int n = 0; rho_hi < hi.zeta; ++n) {
    if (n >= kMaxBracketDoublings) {
      throw NumericalFailure("step: no upper bracket for rho found", hi.zeta);
    }
    rho_hi *= 2.0;
    hi = evaluate(rho_hi);
  }
  budget.P_hat = std::max(budget.P_hat, rho_hi);
  budget.refresh();
  out.eps_rs = budget.eps_rs;

  RhoSearchOptions opts;
  opts.eps_rs = budget.eps_rs;
  opts.max_bisections = config.max_bisections;
  opts.lo_probe = std::move(lo);
  RhoSearchResult res = rho_condition_holds(rho_hi, hi.zeta, budget.eps_rs)
                            ? RhoSearchResult{rho_hi, hi.x_next, hi.a_next, 0,
                                              {rho_lo, rho_hi}, hi, {}}
                            : rho_search(evaluate, rho_lo, rho_hi, opts);
  out.search_log = std::move(res.log);

  const double rho = res.rho_k;
  const double a = res.a_next;
  const double target = (state.A + a) / (L * rho);
  if (std::abs(a * a - target) > kWeightTol * target) {
    throw InvariantViolation("step weight violates a^2 = (A + a) / (L3 rho)");
  }

  AccelState next = state;
  next.A = state.A + a;
  if (!(next.A > state.A)) throw InvariantViolation("accumulated weight did not increase");
  const Vector& x_new = res.x_next;
  const double f_new = eval_f(q, x_new);
  const Vector g_new = grad_f(q, x_new);
  const double r2 = res.probe.zeta;
  next.psi_lin += a * g_new;
  next.psi_scalar += a * (f_new - g_new.dot(x_new));
  next.B += (3.0 * L / 16.0) * next.A * r2 * r2;
  next.v = state.x0 - metric.solve_b(next.psi_lin);
  ++out.linear_solves;
  next.x = x_new;
  next.f_x = f_new;
  ++next.k;

  const double lin_norm = metric.dual_norm(next.psi_lin);
  const double stat = metric.dual_norm(metric.apply_b(next.v - state.x0) + next.psi_lin);
  if (stat > kInvariantTol * std::max(1.0, lin_norm)) {
    std::ostringstream msg;
    msg << "estimate-sequence minimizer is not stationary (residual " << stat << ")";
    throw InvariantViolation(msg.str());
  }
  const double psi_min = next.psi(metric, next.v);
  const double scale = std::max({1.0, std::abs(f_new), std::abs(psi_min) / next.A});
  const double excess = (next.A * f_new + next.B - psi_min) / next.A;
  if (excess > kInvariantTol * scale) {
    std::ostringstream msg;
    msg << "estimate-sequence envelope violated: A f + B exceeds min psi by " << excess
        << " per unit weight";
    throw InvariantViolation(msg.str());
  }

  const double dx = metric.b_norm(x_new - state.x0);
  const double dv = metric.b_norm(next.v - state.x0);
  const double g_dual = metric.dual_norm(g_new);
  budget.observe(std::max({r2, dx * dx, dv * dv}), g_dual * g_dual);

  out.kind = StepKind::accepted;
  out.rho = rho;
  out.zeta = r2;
  out.a = a;
  out.tau = res.probe.tau;
  out.y = res.probe.y;
  out.r_hat = std::sqrt(r2);
  out.x_result = x_new;
  out.f_result = f_new;
  out.grad_result = g_new;
  out.state = std::move(next);
  return out;
}

double uniform_convexity_gap(double gradient_dual_norm, double mu4) {
  return 0.75 * std::pow(mu4, -1.0 / 3.0) * std::pow(gradient_dual_norm, 4.0 / 3.0);
}

int restart_epoch_length(const SmoothnessConstants& constants) {
  return static_cast<int>(std::ceil(std::pow(512.0 * constants.l3 / (3.0 * constants.mu4), 0.2)));
}

SolveReport solve_smooth(const StructuredQuartic& q, const Metric& metric,
                         const SolverConfig& config) {
  return run_accelerated(q, metric, config, {0, 0, Clock::now()});
}

SolveReport solve(const StructuredQuartic& q, const Metric& metric, const SolverConfig& config) {
  if (!(config.eps > 0.0)) throw InvalidArgument("solve: eps must be positive");
  if (config.max_epochs < 0) throw InvalidArgument("solve: max_epochs must be >= 0");
  const SmoothnessConstants sc =
      config.constants ? *config.constants : SmoothnessConstants::for_quartic(q);
  const auto start = Clock::now();

  SolveReport total;
  total.x = config.x0 ? *config.x0 : Vector::Zero(q.dim());
  if (total.x.size() != q.dim()) throw InvalidArgument("solve: x0 has the wrong dimension");
  total.f_final = eval_f(q, total.x);

  SolverConfig epoch_config = config;
  epoch_config.max_iterations = restart_epoch_length(sc);
  epoch_config.gradient_stop = false;
  epoch_config.constants = sc;

  for (int epoch = 0;; ++epoch) {
    const double g = metric.dual_norm(grad_f(q, total.x));
    ++total.linear_solves_total;
    total.certified_gap = uniform_convexity_gap(g, sc.mu4);
    total.wall_nanos = nanos_since(start);
    if (total.certified_gap <= config.eps) {
      total.exit_reason = "gap-met";
      return total;
    }
    if (epoch >= config.max_epochs) {
      total.exit_reason = "epoch-cap";
      std::ostringstream msg;
      msg << "solve: certified gap " << total.certified_gap << " above eps after " << epoch
          << " epochs";
      throw EpochCapExceeded(msg.str(), total);
    }
    epoch_config.x0 = total.x;
    SolveReport r = run_accelerated(q, metric, epoch_config, {epoch, total.outer_iterations, start});
    total.epochs = epoch + 1;
    total.outer_iterations += r.outer_iterations;
    total.aux_iterations_total += r.aux_iterations_total;
    total.linear_solves_total += r.linear_solves_total;
    total.trace.insert(total.trace.end(), r.trace.begin(), r.trace.end());
    if (improves(r.f_final, r.certified_gap, total.f_final, total.certified_gap,
                 roundoff_band(q, total.x))) {
      total.x = std::move(r.x);
      total.f_final = r.f_final;
    }
  }
}

}  // namespace fq
