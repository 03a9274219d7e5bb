// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fastquartic/aux_min.hpp"
#include "fastquartic/fast_quartic.hpp"
#include "fastquartic/harness/bench.hpp"
#include "fastquartic/harness/derivcheck.hpp"
#include "fastquartic/harness/generators.hpp"
#include "fastquartic/harness/propcheck.hpp"
#include "fastquartic/harness/reference.hpp"

using namespace fq;
using namespace fq::harness;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Outcome derivatives() {
  const DerivSuiteResult r = run_derivative_suite(20240601, 50);
  return {r.passed && r.instances == 50,
          "instances=" + std::to_string(r.instances) + " grad=" + fmt(r.worst.grad_error) +
              " hess=" + fmt(r.worst.hess_error) + " third=" + fmt(r.worst.third_error) +
              " fourth=" + fmt(r.worst.fourth_error)};
}

Outcome model_inequalities() {
  Rng rng(20240602);
  PropertyResult upper("model-upper-bound");
  PropertyResult taylor("taylor-identity");
  const int instances = 10;
  for (int k = 0; k < instances; ++k) {
    const int d = 1 + static_cast<int>(rng() % 8);
    const int n = d + static_cast<int>(rng() % (17 - d));
    const StructuredQuartic q = random_quartic(rng, d, n);
    const Metric m = Metric::from_quartic(q);
    upper.merge(check_model_upper_bound(q, m, rng, 1000));
    taylor.merge(check_taylor_identity(q, rng, 1000));
  }
  return {upper.passed && taylor.passed,
          "pairs=" + std::to_string(upper.checked) + "+" + std::to_string(taylor.checked) +
              " violations=" + std::to_string(upper.violations + taylor.violations)};
}

Outcome uniform_convexity() {
  Rng rng(20240603);
  PropertyResult uc("uniform-convexity");
  PropertyResult pm("power-mean");
  for (int k = 0; k < 10; ++k) {
    const int d = 1 + static_cast<int>(rng() % 8);
    const int n = d + static_cast<int>(rng() % (17 - d));
    const StructuredQuartic q = convex_quartic(rng, d, n);
    const Metric m = Metric::from_quartic(q);
    uc.merge(check_uniform_convexity(q, m, rng, 200, 1.0 / (72.0 * n)));
    pm.merge(check_power_mean(n, rng, 200));
  }
  const PropertyResult ce = printed_modulus_counterexample();
  return {uc.passed && pm.passed && ce.passed,
          "samples=" + std::to_string(uc.checked + pm.checked) +
              " violations=" + std::to_string(uc.violations + pm.violations) +
              " printed-modulus-counterexample=" + (ce.passed ? "fails-as-expected" : "NOT-REPRODUCED")};
}

Outcome inner_solver() {
  Rng rng(20240604);
  const double eps = 1e-9;
  int bad = 0;
  double worst_ratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int d = 2 + k % 7;
    const int n = d + 2 + k % 9;
    const StructuredQuartic q = convex_quartic(rng, d, n);
    const Metric m = Metric::from_quartic(q);
    const Vector y = normal_vector(rng, d);
    AuxOptions opts;
    opts.eps_aam = eps;
    const AuxResult r = approx_aux_min(q, m, y, opts);
    opts.eps_aam = eps / 100.0;
    const AuxResult ref = approx_aux_min(q, m, y, opts);
    const double radius = std::pow(12.0 * eps / opts.l3, 0.25);
    const double dist = m.b_norm(r.x_next - ref.x_next);
    worst_ratio = std::max(worst_ratio, dist / radius);
    if (r.final_gap_bound > eps || dist > radius) ++bad;
  }
  return {bad == 0, "instances=20 failures=" + std::to_string(bad) +
                        " worst dist/radius=" + fmt(worst_ratio)};
}

Outcome rho_postcondition() {
  int checks = 0, violations = 0, failures = 0;
  for (std::uint64_t seed : {11u, 12u}) {
    BenchConfig cfg;
    cfg.n_grid = {16, 64, 256, 1024};
    cfg.d = 8;
    cfg.eps = 1e-8;
    cfg.seed = seed;
    const BenchReport r = run_bench(cfg);
    for (const BenchRow& row : r.rows) {
      checks += row.rho_checks;
      violations += row.rho_violations;
      if (!row.ok) ++failures;
    }
  }
  return {violations == 0 && failures == 0 && checks > 0,
          "rechecked=" + std::to_string(checks) + " violations=" + std::to_string(violations) +
              " failed-runs=" + std::to_string(failures)};
}

Outcome estimate_sequence() {
  std::map<std::string, PropertyResult> merged;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Problem p = planted_problem(8, 64, 600 + seed);
    const Metric m = Metric::from_quartic(p.quartic);
    SolverConfig cfg;
    cfg.eps = 1e-10;
    cfg.max_iterations = 40;
    const double f_star = eval_f(p.quartic, *p.x_star);
    for (const PropertyResult& r : audit_accelerated_run(p.quartic, m, *p.x_star, f_star, cfg, 1e-9)) {
      auto it = merged.try_emplace(r.name, r.name).first;
      it->second.merge(r);
    }
  }
  bool ok = !merged.empty();
  std::string detail;
  for (const auto& [name, r] : merged) {
    ok = ok && r.passed;
    detail += name + "=" + std::to_string(r.checked - r.violations) + "/" +
              std::to_string(r.checked) + " ";
  }
  return {ok, detail};
}

Outcome end_to_end() {
  const double eps = 1e-8;
  struct Case {
    int d, n;
  };
  int bad = 0;
  double worst_time = 0.0;
  double worst_gap = 0.0;
  std::string failures;
  for (Case c : {Case{4, 16}, Case{8, 64}, Case{16, 256}, Case{32, 1024}}) {
    const Problem p = planted_problem(c.d, c.n, 700 + c.d);
    const Metric m = Metric::from_quartic(p.quartic);
    const auto t0 = std::chrono::steady_clock::now();
    SolverConfig cfg;
    cfg.eps = eps;
    SolveReport r;
    try {
      r = solve(p.quartic, m, cfg);
    } catch (const std::exception& e) {
      ++bad;
      failures += std::string(" ") + e.what();
      continue;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    worst_time = std::max(worst_time, secs);
    const ReferenceSolution ref = reference_newton(p.quartic, m, Vector::Zero(c.d));
    const double f_star = eval_f(p.quartic, *p.x_star);
    const double gap = r.f_final - f_star;
    worst_gap = std::max(worst_gap, gap);
    if (!(r.certified_gap <= eps) || gap > eps || std::abs(r.f_final - ref.f_star) > 2.0 * eps ||
        secs > 120.0) {
      ++bad;
      failures += " d=" + std::to_string(c.d) + ",n=" + std::to_string(c.n);
    }
  }
  return {bad == 0, "worst gap=" + fmt(worst_gap) + " worst time=" + fmt(worst_time) + "s" +
                        (failures.empty() ? "" : " failures:" + failures)};
}

Outcome restart_halving() {
  int epochs = 0, violations = 0;
  Rng rng(20240608);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const int d = 2 + static_cast<int>(seed);
    const Problem p = planted_problem(d, 4 * d, 800 + seed);
    const Metric m = Metric::from_quartic(p.quartic);
    const double f_star = eval_f(p.quartic, *p.x_star);
    std::map<int, double> best_in_epoch;
    SolverConfig cfg;
    cfg.eps = 1e-10;
    // far starts so that several restarts happen
    cfg.x0 = *p.x_star + normal_vector(rng, d, 1e3);
    cfg.on_trace = [&](const TraceRecord& t) {
      auto [it, fresh] = best_in_epoch.try_emplace(t.epoch, t.f);
      if (!fresh) it->second = std::min(it->second, t.f);
    };
    solve(p.quartic, m, cfg);
    double start_gap = eval_f(p.quartic, *cfg.x0) - f_star;
    for (const auto& [epoch, f] : best_in_epoch) {
      const double end_gap = std::min(start_gap, f - f_star);
      ++epochs;
      // absolute slack for the roundoff floor of f near f*
      const double roundoff = 1e-12 * std::max(1.0, std::abs(f_star));
      if (end_gap > 0.5 * start_gap + roundoff) ++violations;
      start_gap = end_gap;
    }
  }
  return {violations == 0 && epochs > 0,
          "epochs=" + std::to_string(epochs) + " violations=" + std::to_string(violations)};
}

Outcome scaling() {
  BenchConfig cfg;
  cfg.n_grid = {16, 64, 256, 1024};
  cfg.d = 8;
  cfg.eps = 1e-6;
  cfg.seed = 900;
  cfg.repeats = 3;
  const BenchReport r = run_bench(cfg);
  std::map<int, std::pair<int, int>> iters;
  int failures = 0;
  for (const BenchRow& row : r.rows) {
    if (!row.ok) ++failures;
    iters[row.n].first += row.report.outer_iterations;
    iters[row.n].second += 1;
  }
  std::string detail = "slope=" + (r.slope ? fmt(*r.slope) : std::string("none")) + " iters:";
  for (const auto& [n, acc] : iters) {
    detail += " n" + std::to_string(n) + "=" + fmt(static_cast<double>(acc.first) / acc.second);
  }
  return {failures == 0 && r.slope && *r.slope >= 0.0 && *r.slope <= 0.35, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "derivative-oracles", 10.0, derivatives},
      {2, "model-inequalities", 10.0, model_inequalities},
      {3, "uniform-convexity", 1.0, uniform_convexity},
      {4, "inner-solver", 30.0, inner_solver},
      {5, "rho-postcondition", 0.0, rho_postcondition},
      {6, "estimate-sequence", 120.0, estimate_sequence},
      {7, "end-to-end", 0.0, end_to_end},
      {8, "restart-halving", 0.0, restart_halving},
      {9, "scaling-slope", 300.0, scaling},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.time_limit_s <= 0.0 || secs <= c.time_limit_s;
    const bool pass = o.passed && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %d %s (%.2fs%s) %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs,
                in_time ? "" : ", over time limit", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
