#include "fastquartic/harness/generators.hpp"

#include <cmath>

#include "fastquartic/errors.hpp"

namespace fq::harness {

namespace {

void check_dims(int d, int n) {
  if (d < 1 || n < d) {
    throw InvalidArgument("generator: need n >= d >= 1, got d=" + std::to_string(d) +
                          " n=" + std::to_string(n));
  }
}

L4Data l4_data(Rng& rng, int d, int n) {
  if (d == 1 && n == 1) return {Matrix::Ones(1, 1), Vector::Zero(1), Vector::Zero(1)};
  L4Data data;
  data.A = ridge_design(rng, d, n);
  data.b = normal_vector(rng, n);
  data.c = normal_vector(rng, d);
  return data;
}

}  // namespace

Vector uniform_vector(Rng& rng, int size, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(size);
  for (int i = 0; i < size; ++i) v[i] = u(rng);
  return v;
}

Vector normal_vector(Rng& rng, int size, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(size);
  for (int i = 0; i < size; ++i) v[i] = nd(rng);
  return v;
}

Matrix ridge_design(Rng& rng, int d, int n) {
  check_dims(d, n);
  Matrix A = Matrix::Zero(n, d);
  std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  for (int r = 0; r < n - d; ++r) {
    for (int c = 0; c < d; ++c) A(r, c) = nd(rng);
  }
  for (int c = 0; c < d; ++c) A(n - d + c, c) = 0.5;
  return A;
}

Problem planted_problem(int d, int n, std::uint64_t seed) {
  return parse_problem(gen_instance("planted", d, n, seed));
}

nlohmann::json gen_instance(const std::string& kind, int d, int n, std::uint64_t seed) {
  check_dims(d, n);
  Rng rng(seed);
  if (kind == "l4") return l4_problem_json(l4_data(rng, d, n));
  if (kind == "planted") {
    L4Data data = l4_data(rng, d, n);
    Vector x_star = Vector::Zero(d);
    if (!(d == 1 && n == 1)) x_star = normal_vector(rng, d);
    const Vector r = data.A * x_star - data.b;
    data.c = -4.0 * data.A.transpose() * r.array().cube().matrix();
    nlohmann::json j = l4_problem_json(data);
    j["planted"] = {{"x_star", to_json(x_star)},
                    {"f_star", l4_objective(data.A, data.b, data.c, x_star)}};
    return j;
  }
  if (kind == "dense-quartic") {
    if (d == 1 && n == 1) {
      return general_problem_json(
          StructuredQuartic(Vector::Zero(1), Matrix::Zero(1, 1), SymmetricTensor3(1, {}),
                            Matrix::Ones(1, 1)));
    }
    return general_problem_json(convex_quartic(rng, d, n));
  }
  throw InvalidArgument("generator: unknown kind '" + kind + "'");
}

StructuredQuartic random_quartic(Rng& rng, int d, int n) {
  check_dims(d, n);
  Vector c = uniform_vector(rng, d);
  Matrix G(d, d);
  for (int i = 0; i < d; ++i) G.col(i) = uniform_vector(rng, d);
  std::vector<TensorEntry> entries;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      for (int k = j; k < d; ++k) entries.push_back({i, j, k, u(rng)});
    }
  }
  Matrix A(n, d);
  for (int r = 0; r < n; ++r) A.row(r) = uniform_vector(rng, d).transpose();
  for (int c2 = 0; c2 < d; ++c2) A(n - d + c2, c2) += 1.5;
  return StructuredQuartic(std::move(c), std::move(G), SymmetricTensor3(d, std::move(entries)),
                           std::move(A));
}

StructuredQuartic convex_quartic(Rng& rng, int d, int n) {
  const L4Data data = l4_data(rng, d, n);
  StructuredQuartic base = from_l4_regression(data.A, data.b, data.c);
  Matrix M(d, d);
  for (int i = 0; i < d; ++i) M.col(i) = normal_vector(rng, d, 0.5 / std::sqrt(d));
  Matrix G = base.G() + M.transpose() * M;
  return StructuredQuartic(base.c(), std::move(G), base.T(), base.A());
}

}  // namespace fq::harness
