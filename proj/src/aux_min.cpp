#include "fastquartic/aux_min.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastquartic/errors.hpp"

namespace fq {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kStationarityTol = 1e-9;
constexpr int kMaxRootIterations = 200;
// Relative smoothness constant of the model w.r.t. d(h); strong convexity is 1 - 1/sqrt 2.
constexpr double kRelativeSmoothness = 1.0 + 1.0 / kSqrt2;

// Third-order Taylor model of f at y plus the quartic B-regularizer, in the
// step variable h (Gamma in the literature).
class RegularizedModel {
 public:
  RegularizedModel(const StructuredQuartic& q, const Metric& metric, Vector y, double l3,
                   bool materialize)
      : q_(q), metric_(metric), y_(std::move(y)), l3_(l3) {
    f0_ = eval_f(q_, y_);
    g0_ = grad_f(q_, y_);
    ay_ = q_.apply_A(y_);
    if (materialize) {
      H_ = hess_matrix(q_, y_);
    } else {
      hess_op_ = hess_operator(q_, y_);
    }
  }

  const Vector& y() const { return y_; }
  double f0() const { return f0_; }
  bool has_matrix() const { return H_.has_value(); }
  const Matrix& hessian() const { return *H_; }

  LinearOperator hessian_operator() const {
    if (H_) {
      const Matrix* H = &*H_;
      return [H](const Vector& v) -> Vector { return (*H) * v; };
    }
    return hess_op_;
  }

  Vector hess(const Vector& h) const { return H_ ? Vector(*H_ * h) : hess_op_(h); }

  double value(const Vector& h) const {
    const Vector ah = q_.apply_A(h);
    const double third = 6.0 * q_.T().form(h) + (ay_.array() * ah.array().cube()).sum();
    const double r = metric_.b_norm(h);
    return g0_.dot(h) + 0.5 * h.dot(hess(h)) + third / 6.0 + 0.25 * l3_ * r * r * r * r;
  }

  Vector gradient(const Vector& h) const {
    const Vector ah = q_.apply_A(h);
    const Vector w = ay_.array() * ah.array().square();
    const Vector third = 6.0 * q_.T().contract2(h, h) + q_.apply_At(w);
    const Vector bh = metric_.apply_b(h);
    return g0_ + hess(h) + 0.5 * third + l3_ * h.dot(bh) * bh;
  }

 private:
  const StructuredQuartic& q_;
  const Metric& metric_;
  Vector y_;
  double l3_;
  double f0_ = 0.0;
  Vector g0_;
  Vector ay_;
  std::optional<Matrix> H_;
  LinearOperator hess_op_;
};

struct ScalarTrial {
  double phi;
  double dphi;
};

// Root of the increasing consistency map phi(u) = u - log(s'Bs) over
// u = log(rho), starting from a point with phi >= 0. phi' >= 1 everywhere, so
// u_hi - phi(u_hi) brackets the root from below.
template <class Eval>
double find_consistent_log_rho(double u_hi, Eval&& eval, int& iterations) {
  std::vector<std::pair<double, double>> samples;
  auto sample = [&](double u) {
    ScalarTrial t = eval(u);
    ++iterations;
    if (!std::isfinite(t.phi) || !std::isfinite(t.dphi)) {
      throw NumericalFailure("inner step: non-finite consistency value", INFINITY);
    }
    for (const auto& [us, ps] : samples) {
      const double slack = 1e-10 * (1.0 + std::abs(ps) + std::abs(t.phi));
      if ((us < u && ps > t.phi + slack) || (us > u && ps < t.phi - slack)) {
        throw NumericalFailure("inner step: consistency map is not monotone", std::abs(ps - t.phi));
      }
    }
    samples.emplace_back(u, t.phi);
    return t;
  };

  constexpr double tol = 1e-14;
  ScalarTrial hi_trial = sample(u_hi);
  if (std::abs(hi_trial.phi) <= tol) return u_hi;
  double hi = u_hi;
  double lo = u_hi - std::max(hi_trial.phi, 1.0);
  ScalarTrial lo_trial = sample(lo);
  while (lo_trial.phi > 0.0) {
    const double width = hi - lo;
    hi = lo;
    lo -= 2.0 * width;
    lo_trial = sample(lo);
  }
  if (std::abs(lo_trial.phi) <= tol) return lo;

  double u = hi - hi_trial.phi / hi_trial.dphi;
  if (!(u > lo && u < hi)) u = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const ScalarTrial t = sample(u);
    if (std::abs(t.phi) <= tol) return u;
    if (t.phi > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
      return u;
    }
    double next = u - t.phi / t.dphi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  throw NumericalFailure("inner step: consistency root not found", std::abs(samples.back().second));
}

double stationarity_residual(const Metric& metric, const LinearOperator& H, const Vector& c,
                             const Vector& s, double l3) {
  const Vector bs = metric.apply_b(s);
  const Vector res = c + kSqrt2 * H(s) + kSqrt2 * l3 * s.dot(bs) * bs;
  const double cn = metric.dual_norm(c);
  return cn > 0.0 ? metric.dual_norm(res) / cn : 0.0;
}

void check_step(const InnerStep& step) {
  if (!(step.relative_residual <= kStationarityTol)) {
    throw NumericalFailure("inner step: stationarity residual " +
                               std::to_string(step.relative_residual) + " above tolerance",
                           step.relative_residual);
  }
}

}  // namespace

double model_gap_certificate(double gradient_dual_norm, double l3) {
  return 0.75 * std::cbrt(12.0 / l3) * std::pow(gradient_dual_norm, 4.0 / 3.0);
}

double model_distance_bound(double gradient_dual_norm, double displacement, double l3) {
  if (gradient_dual_norm <= 0.0) return 0.0;
  double bound = std::cbrt(6.0 * gradient_dual_norm / l3);
  for (int pass = 0; pass < 4; ++pass) {
    if (displacement <= bound) break;
    const double gap = displacement - bound;
    const double modulus = 0.5 * l3 * gap * gap;
    bound = std::min(bound, gradient_dual_norm / modulus);
  }
  return bound;
}

Vector subproblem_gradient(const StructuredQuartic& q, const Metric& metric, const Vector& y,
                           const Vector& h, double l3) {
  if (y.size() != q.dim() || h.size() != q.dim() || metric.dim() != q.dim()) {
    throw InvalidArgument("subproblem_gradient: dimension mismatch");
  }
  return RegularizedModel(q, metric, y, l3, false).gradient(h);
}

InnerStep solve_inner_step(const Metric& metric, const Matrix& H, const Vector& c, double l3) {
  const ShiftedPencil pencil(metric, H);
  return solve_inner_step(metric, pencil, [&H](const Vector& v) -> Vector { return H * v; }, c,
                          l3);
}

InnerStep solve_inner_step(const Metric& metric, const ShiftedPencil& pencil,
                           const LinearOperator& H, const Vector& c, double l3) {
  if (c.size() != metric.dim() || pencil.dim() != metric.dim()) {
    throw InvalidArgument("solve_inner_step: dimension mismatch");
  }
  if (!(l3 > 0.0)) throw InvalidArgument("solve_inner_step: L3 must be positive");
  InnerStep out;
  out.step = Vector::Zero(c.size());
  const Vector chat = pencil.to_spectral(c);
  const double c2 = chat.squaredNorm();
  if (c2 == 0.0) return out;

  const Vector chat2 = chat.array().square();
  const Vector& lambda = pencil.eigenvalues();
  auto eval = [&](double u) -> ScalarTrial {
    const double rho = std::exp(u);
    const Eigen::ArrayXd den = lambda.array() + l3 * rho;
    const double s2 = (chat2.array() / den.square()).sum();
    const double s3 = (chat2.array() / den.cube()).sum();
    return {u - std::log(0.5 * s2), 1.0 + 2.0 * l3 * rho * s3 / s2};
  };
  // H = 0 root; s'Bs only shrinks as H grows, so phi >= 0 there
  const double u0 = std::log(c2 / (2.0 * l3 * l3)) / 3.0;
  const double u = find_consistent_log_rho(u0, eval, out.root_iterations);
  out.rho = std::exp(u);
  const Eigen::ArrayXd den = lambda.array() + l3 * out.rho;
  out.step = -pencil.from_spectral((chat.array() / den).matrix()) / kSqrt2;
  out.linear_solves = 1;
  out.relative_residual = stationarity_residual(metric, H, c, out.step, l3);
  check_step(out);
  return out;
}

InnerStep solve_inner_step(const Metric& metric, const LinearOperator& H, const Vector& c,
                           double l3) {
  if (c.size() != metric.dim()) throw InvalidArgument("solve_inner_step: dimension mismatch");
  if (!(l3 > 0.0)) throw InvalidArgument("solve_inner_step: L3 must be positive");
  InnerStep out;
  out.step = Vector::Zero(c.size());
  const double cn = metric.dual_norm(c);
  if (cn == 0.0) return out;

  Vector last_step;
  double last_u = std::numeric_limits<double>::quiet_NaN();
  auto eval = [&](double u) -> ScalarTrial {
    const double rho = std::exp(u);
    const double lambda = l3 * rho / kSqrt2;
    Vector s = -metric.solve_shifted(H, lambda, c) / kSqrt2;
    const Vector bs = metric.apply_b(s);
    const double q = s.dot(bs);
    const Vector w = metric.solve_shifted(H, lambda, bs);
    out.linear_solves += 2;
    last_step = std::move(s);
    last_u = u;
    return {u - std::log(q), 1.0 + 2.0 * l3 * rho * bs.dot(w) / q};
  };
  const double u0 = std::log(cn * cn / (2.0 * l3 * l3)) / 3.0;
  const double u = find_consistent_log_rho(u0, eval, out.root_iterations);
  if (u != last_u) eval(u);
  out.rho = std::exp(u);
  out.step = last_step;
  out.relative_residual = stationarity_residual(metric, H, c, out.step, l3);
  check_step(out);
  return out;
}

AuxResult approx_aux_min(const StructuredQuartic& q, const Metric& metric, const Vector& y,
                         const AuxOptions& options) {
  if (y.size() != q.dim() || metric.dim() != q.dim()) {
    throw InvalidArgument("approx_aux_min: dimension mismatch");
  }
  if (!(options.eps_aam > 0.0)) throw InvalidArgument("approx_aux_min: eps_aam must be positive");
  if (!(options.l3 > 0.0)) throw InvalidArgument("approx_aux_min: L3 must be positive");
  if (!y.allFinite()) throw InvalidArgument("approx_aux_min: y must be finite");

  const bool dense = metric.is_dense() && !options.force_iterative;
  const RegularizedModel model(q, metric, y, options.l3, dense);
  std::optional<ShiftedPencil> pencil;
  const LinearOperator H = model.hessian_operator();

  AuxResult result;
  Vector h = Vector::Zero(q.dim());
  double gamma = 0.0;
  for (int t = 0;; ++t) {
    const Vector c = model.gradient(h);
    const double g = metric.dual_norm(c);
    const double gap = model_gap_certificate(g, options.l3);
    if (options.on_iteration) options.on_iteration({t, model.f0() + gamma, gap, g});
    if (gap <= options.eps_aam) {
      result.iterations = t + 1;
      result.final_gap_bound = gap;
      result.gradient_dual_norm = g;
      break;
    }
    if (t >= options.max_iters) {
      throw ConvergenceFailure("approx_aux_min: certified gap " + std::to_string(gap) +
                                   " above eps_aam after " + std::to_string(t) + " iterations",
                               y + h, gap);
    }
    // Bregman step for the reference d(h) = h'Hh/2 + (L3/4)||h||_B^4:
    //   argmin <c, h> + kappa (d(h) - <grad d(h_t), h>)
    // which is the inner subproblem with linear term -sqrt(2) w.
    const Vector bh = metric.apply_b(h);
    const Vector w = model.hess(h) + options.l3 * h.dot(bh) * bh - c / kRelativeSmoothness;
    InnerStep step;
    if (dense) {
      if (!pencil) pencil.emplace(metric, model.hessian());
      step = solve_inner_step(metric, *pencil, H, -kSqrt2 * w, options.l3);
    } else {
      step = solve_inner_step(metric, H, -kSqrt2 * w, options.l3);
    }
    result.linear_solves += step.linear_solves;
    h = step.step;
    const double next = model.value(h);
    if (next > gamma + 1e-12 * (1.0 + std::abs(gamma))) {
      throw NumericalFailure("approx_aux_min: model value increased", next - gamma);
    }
    gamma = next;
  }

  result.x_next = y + h;
  result.model_value = model.f0() + gamma;
  result.displacement_b_norm = metric.b_norm(h);
  result.distance_bound =
      model_distance_bound(result.gradient_dual_norm, result.displacement_b_norm, options.l3);
  return result;
}

}  // namespace fq
