#include "fastquartic/harness/propcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fastquartic/harness/reference.hpp"

namespace fq::harness {

namespace {

constexpr double kSampleScale = 2.0;

double b_norm4(const Metric& metric, const Vector& v) {
  const double r = metric.b_norm(v);
  return r * r * r * r;
}

}  // namespace

void PropertyResult::check(double lhs, double rhs, double slack) {
  ++checked;
  const double excess = lhs - rhs;
  worst = std::max(worst, excess);
  if (!(excess <= slack)) {
    ++violations;
    passed = false;
  }
}

void PropertyResult::merge(const PropertyResult& other) {
  checked += other.checked;
  violations += other.violations;
  worst = std::max(worst, other.worst);
  passed = passed && other.passed;
  if (detail.empty()) detail = other.detail;
}

nlohmann::json to_json(const PropertyResult& r) {
  nlohmann::json j = {{"name", r.name},
                      {"passed", r.passed},
                      {"checked", r.checked},
                      {"violations", r.violations}};
  j["worst"] = std::isfinite(r.worst) ? nlohmann::json(r.worst) : nlohmann::json(nullptr);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

PropertyResult check_taylor_identity(const StructuredQuartic& q, Rng& rng, int samples) {
  PropertyResult r{"taylor-identity"};
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const Vector y = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const double fy = eval_f(q, y);
    const double lhs = fy - taylor_phi(q, x, y);
    const double rhs = fourth_form(q, y - x) / 24.0;
    const double scale = std::max({1.0, std::abs(fy), std::abs(rhs)});
    r.check(std::abs(lhs - rhs) / scale, 0.0, 1e-10);
  }
  return r;
}

PropertyResult check_model_upper_bound(const StructuredQuartic& q, const Metric& metric, Rng& rng,
                                       int samples) {
  PropertyResult r{"model-upper-bound"};
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const Vector y = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const double fy = eval_f(q, y);
    r.check(fy, omega_eval(q, 1.0, metric, x, y), 1e-10 * std::max(1.0, std::abs(fy)));
  }
  return r;
}

PropertyResult check_uniform_convexity(const StructuredQuartic& q, const Metric& metric, Rng& rng,
                                       int samples, double modulus) {
  PropertyResult r{"uniform-convexity"};
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const Vector y = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const double fy = eval_f(q, y);
    const double lower = eval_f(q, x) + grad_f(q, x).dot(y - x) + modulus * b_norm4(metric, y - x);
    r.check(lower, fy, 1e-10 * std::max(1.0, std::abs(fy)));
  }
  return r;
}

PropertyResult check_power_mean(int n, Rng& rng, int samples) {
  PropertyResult r{"power-mean"};
  for (int s = 0; s < samples; ++s) {
    const Vector v = normal_vector(rng, n);
    const double n2 = v.squaredNorm();
    r.check(n2 * n2 / n, v.array().pow(4).sum(), 1e-12 * n2 * n2);
  }
  return r;
}

PropertyResult check_model_uniform_convexity(const StructuredQuartic& q, const Metric& metric,
                                             Rng& rng, int samples) {
  PropertyResult r{"model-uniform-convexity"};
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const Vector y = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const Vector z = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const double oz = omega_eval(q, 1.0, metric, x, z);
    const double lower = omega_eval(q, 1.0, metric, x, y) +
                         omega_grad(q, 1.0, metric, x, y).dot(z - y) +
                         b_norm4(metric, z - y) / 12.0;
    r.check(lower, oz, 1e-10 * std::max(1.0, std::abs(oz)));
  }
  return r;
}

PropertyResult check_third_order_smoothness(const StructuredQuartic& q, const Metric& metric,
                                            Rng& rng, int samples) {
  PropertyResult r{"third-order-smoothness"};
  for (int s = 0; s < samples; ++s) {
    const Vector x = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    const Vector y = uniform_vector(rng, q.dim(), -kSampleScale, kSampleScale);
    Vector h = normal_vector(rng, q.dim());
    h /= metric.b_norm(h);
    const double diff = std::abs(third_form(q, y, h) - third_form(q, x, h));
    const double scale = std::abs(third_form(q, y, h)) + std::abs(third_form(q, x, h));
    r.check(diff, metric.b_norm(y - x), 1e-12 * std::max(1.0, scale));
  }
  return r;
}

PropertyResult printed_modulus_counterexample() {
  PropertyResult r{"printed-modulus-counterexample"};
  const int n = 2;
  Vector v = Vector::Zero(n);
  v[0] = 1.0;
  const double l4 = v.array().pow(4).sum();
  const double l2 = v.squaredNorm() * v.squaredNorm();
  // printed form: ||v||_4^4 >= n ||v||_2^4 must fail; corrected must hold
  const bool printed_norm_fails = l4 < n * l2;
  const bool corrected_norm_holds = l4 >= l2 / n;

  // f = (1/24)||x||_4^4 on R^2 (A = I, B = I): the Bregman gap at x = e1
  // toward y = x - 3 e1 is 27/24, below (n/72)||y - x||^4 = 81/36.
  const StructuredQuartic q(Vector::Zero(2), Matrix::Zero(2, 2), SymmetricTensor3(2, {}),
                            Matrix::Identity(2, 2));
  const Vector x = v;
  const Vector y = x - 3.0 * v;
  const double bregman = eval_f(q, y) - eval_f(q, x) - grad_f(q, x).dot(y - x);
  const double dist4 = std::pow((y - x).norm(), 4);
  const bool printed_fn_fails = bregman < (n / 72.0) * dist4;
  const bool corrected_fn_holds = bregman >= dist4 / (72.0 * n);

  r.checked = 4;
  r.passed = printed_norm_fails && corrected_norm_holds && printed_fn_fails && corrected_fn_holds;
  r.violations = r.passed ? 0 : 1;
  r.worst = bregman - (n / 72.0) * dist4;
  std::ostringstream msg;
  msg << "n=2 v=e1: ||v||_4^4=" << l4 << " n||v||_2^4=" << n * l2 << "; bregman=" << bregman
      << " printed bound=" << (n / 72.0) * dist4 << " corrected bound=" << dist4 / (72.0 * n);
  r.detail = msg.str();
  return r;
}

bool recheck_rho_band(const StructuredQuartic& q, const Metric& metric, const StepOutcome& out,
                      const AccelState& before, const TheoryBudget& budget,
                      const SolverConfig& config) {
  if (out.kind != StepKind::accepted) return true;
  AuxOptions aux;
  aux.eps_aam = budget.eps_aam;
  aux.max_iters = config.aux_max_iters;
  aux.l3 = budget.l3;
  aux.force_iterative = config.force_iterative;
  const ZetaProbe p = zeta_hat(q, metric, before.x, before.v, before.A, out.rho, aux);
  return rho_condition_holds(out.rho, p.zeta, out.eps_rs);
}

std::vector<PropertyResult> audit_accelerated_run(const StructuredQuartic& q,
                                                  const Metric& metric, const Vector& x_star,
                                                  double f_star, SolverConfig config,
                                                  double slack) {
  const Vector x0 = config.x0 ? *config.x0 : Vector::Zero(q.dim());
  const double D = metric.b_norm(x0 - x_star);
  const double D2 = D * D;
  const double L = config.constants ? config.constants->l3 : 1.0;

  PropertyResult band{"rho-band-recheck"};
  PropertyResult envelope{"psi-envelope"};
  PropertyResult gap_vs_weight{"gap-vs-weight"};
  PropertyResult weight_growth{"weight-growth"};
  PropertyResult rate{"rate-envelope"};
  PropertyResult b_bound{"B-bound"};
  PropertyResult v_bound{"v-boundedness"};
  PropertyResult weight_vs_rho{"weight-vs-rho"};
  PropertyResult early{"early-exit-guarantee"};

  struct Term {
    double a;
    Vector x;
    double f_gap;
    Vector g;
  };
  std::vector<Term> terms;
  double inv_sqrt_rho_sum = 0.0;

  const SolverConfig base = config;
  config.on_step = [&](const StepOutcome& out, const AccelState& before,
                       const TheoryBudget& budget) {
    const double gap = out.f_result - f_star;
    if (out.kind != StepKind::accepted) {
      early.check(gap, 2.0 * L * budget.rho_init_minus * D2, slack);
      return;
    }
    const AccelState& s = out.state;
    const double k = s.k;
    band.check(recheck_rho_band(q, metric, out, before, budget, base) ? 0.0 : 1.0, 0.0, 0.0);

    // psi_k(v_k) - A_k f* rebuilt from the accepted points with gaps f - f*
    terms.push_back({out.a, out.x_result, gap, out.grad_result});
    double psi_shifted = 0.5 * std::pow(metric.b_norm(s.v - s.x0), 2);
    for (const Term& t : terms) psi_shifted += t.a * (t.f_gap + t.g.dot(s.v - t.x));
    envelope.check(s.A * gap + s.B, psi_shifted, slack);

    gap_vs_weight.check(gap, D2 / (2.0 * s.A), slack);
    weight_growth.check(3.0 / (256.0 * L * D2) * std::pow((k + 1.0) / 2.0, 5), s.A, slack);
    rate.check(gap, 128.0 * L * D2 * D2 / 3.0 * std::pow(2.0 / (k + 1.0), 5), slack);
    b_bound.check(s.B, 0.5 * D2, slack);
    v_bound.check(metric.b_norm(s.v - x_star), D, slack);
    inv_sqrt_rho_sum += 1.0 / std::sqrt(out.rho);
    weight_vs_rho.check(inv_sqrt_rho_sum * inv_sqrt_rho_sum / (4.0 * L), s.A,
                        slack + 1e-12 * s.A);
  };
  config.x0 = x0;
  solve_smooth(q, metric, config);
  return {band, envelope, gap_vs_weight, weight_growth, rate, b_bound, v_bound, weight_vs_rho,
          early};
}

std::vector<PropertyResult> run_property_suite(std::uint64_t seed, int instances) {
  Rng rng(seed);
  std::vector<PropertyResult> results = {
      {"taylor-identity"},         {"model-upper-bound"},      {"uniform-convexity"},
      {"power-mean"},              {"model-uniform-convexity"}, {"third-order-smoothness"},
  };
  for (int k = 0; k < instances; ++k) {
    const int d = std::uniform_int_distribution<int>(1, 6)(rng);
    const int n = std::uniform_int_distribution<int>(d, 16)(rng);
    const StructuredQuartic general = random_quartic(rng, d, n);
    const Metric general_metric = Metric::from_quartic(general);
    const StructuredQuartic convex = convex_quartic(rng, d, n);
    const Metric convex_metric = Metric::from_quartic(convex);
    results[0].merge(check_taylor_identity(general, rng, 200));
    results[1].merge(check_model_upper_bound(general, general_metric, rng, 200));
    results[2].merge(check_uniform_convexity(convex, convex_metric, rng, 200, 1.0 / (72.0 * n)));
    results[3].merge(check_power_mean(n, rng, 200));
    results[4].merge(check_model_uniform_convexity(convex, convex_metric, rng, 200));
    results[5].merge(check_third_order_smoothness(general, general_metric, rng, 200));
  }
  results.push_back(printed_modulus_counterexample());

  std::vector<PropertyResult> audit;
  for (int k = 0; k < std::max(1, instances / 4); ++k) {
    const Problem p = planted_problem(4, 16, seed + 1000 + k);
    const Metric metric = Metric::from_quartic(p.quartic);
    SolverConfig config;
    config.eps = 1e-8;
    const auto part = audit_accelerated_run(p.quartic, metric, *p.x_star,
                                            eval_f(p.quartic, *p.x_star), config);
    if (audit.empty()) {
      audit = part;
    } else {
      for (std::size_t i = 0; i < part.size(); ++i) audit[i].merge(part[i]);
    }
  }
  results.insert(results.end(), audit.begin(), audit.end());
  return results;
}

}  // namespace fq::harness
