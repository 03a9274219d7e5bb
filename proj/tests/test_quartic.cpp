#include <gtest/gtest.h>

#include <cmath>

#include "fastquartic/errors.hpp"
#include "fastquartic/harness/derivcheck.hpp"
#include "fastquartic/harness/generators.hpp"
#include "fastquartic/harness/propcheck.hpp"
#include "fastquartic/metric.hpp"
#include "fastquartic/quartic.hpp"

using namespace fq;
using fq::harness::Rng;

namespace {

StructuredQuartic pure_quartic_1d() {
  return StructuredQuartic(Vector::Zero(1), Matrix::Zero(1, 1), SymmetricTensor3(1, {}),
                           Matrix::Ones(1, 1));
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(SymmetricTensor, CanonicalizesIndexOrder) {
  SymmetricTensor3 T(3, {{2, 0, 1, 1.5}});
  ASSERT_EQ(T.entries().size(), 1u);
  EXPECT_EQ(T.entries()[0].i, 0);
  EXPECT_EQ(T.entries()[0].j, 1);
  EXPECT_EQ(T.entries()[0].k, 2);
  EXPECT_DOUBLE_EQ(T.at(1, 2, 0), 1.5);
  EXPECT_DOUBLE_EQ(T.at(0, 0, 0), 0.0);
}

TEST(SymmetricTensor, FormCountsPermutations) {
  const Vector x = vec({2.0, 3.0, 5.0});
  EXPECT_DOUBLE_EQ(SymmetricTensor3(3, {{0, 1, 2, 1.0}}).form(x), 6.0 * 30.0);
  EXPECT_DOUBLE_EQ(SymmetricTensor3(3, {{0, 0, 1, 1.0}}).form(x), 3.0 * 12.0);
  EXPECT_DOUBLE_EQ(SymmetricTensor3(3, {{2, 2, 2, 1.0}}).form(x), 125.0);
}

TEST(SymmetricTensor, ContractionsMatchForm) {
  Rng rng(5);
  std::vector<TensorEntry> entries = {{0, 1, 2, 0.7}, {1, 1, 1, -0.3}, {0, 0, 2, 1.1}};
  SymmetricTensor3 T(3, entries);
  const Vector x = harness::uniform_vector(rng, 3);
  EXPECT_NEAR(T.contract2(x, x).dot(x), T.form(x), 1e-12);
  EXPECT_NEAR((T.contract1(x) * x - T.contract2(x, x)).norm(), 0.0, 1e-12);
}

TEST(SymmetricTensor, RejectsDuplicatesAndBadIndices) {
  EXPECT_THROW(SymmetricTensor3(3, {{0, 1, 2, 1.0}, {2, 1, 0, 1.0}}), InvalidArgument);
  EXPECT_THROW(SymmetricTensor3(2, {{0, 1, 2, 1.0}}), InvalidArgument);
  EXPECT_THROW(SymmetricTensor3(2, {{-1, 0, 0, 1.0}}), InvalidArgument);
}

TEST(StructuredQuartic, ValidatesShapes) {
  EXPECT_THROW(StructuredQuartic(Vector::Zero(2), Matrix::Zero(3, 3), SymmetricTensor3(2, {}),
                                 Matrix::Identity(2, 2)),
               InvalidArgument);
  EXPECT_THROW(StructuredQuartic(Vector::Zero(2), Matrix::Zero(2, 2), SymmetricTensor3(3, {}),
                                 Matrix::Identity(2, 2)),
               InvalidArgument);
  Vector c = Vector::Zero(2);
  c[0] = std::nan("");
  EXPECT_THROW(StructuredQuartic(c, Matrix::Zero(2, 2), SymmetricTensor3(2, {}),
                                 Matrix::Identity(2, 2)),
               InvalidArgument);
}

TEST(StructuredQuartic, RejectsSingularGram) {
  Matrix A(1, 2);
  A << 1.0, 1.0;
  EXPECT_THROW(StructuredQuartic(Vector::Zero(2), Matrix::Zero(2, 2), SymmetricTensor3(2, {}), A),
               NotPositiveDefinite);
}

TEST(Derivatives, PureQuarticClosedForms) {
  const StructuredQuartic q = pure_quartic_1d();
  const Vector x = vec({3.0});
  const Vector h = vec({2.0});
  EXPECT_DOUBLE_EQ(eval_f(q, x), 81.0 / 24.0);
  EXPECT_DOUBLE_EQ(grad_f(q, x)[0], 27.0 / 6.0);
  EXPECT_DOUBLE_EQ(hess_matrix(q, x)(0, 0), 9.0 / 2.0);
  EXPECT_DOUBLE_EQ(third_apply(q, x, h)[0], 3.0 * 4.0);
  EXPECT_DOUBLE_EQ(third_form(q, x, h), 3.0 * 8.0);
  EXPECT_DOUBLE_EQ(fourth_form(q, h), 16.0);
}

TEST(Derivatives, AtOriginOnlyLinearPartRemains) {
  Rng rng(3);
  const StructuredQuartic q = harness::random_quartic(rng, 4, 7);
  const Vector zero = Vector::Zero(4);
  EXPECT_EQ(eval_f(q, zero), 0.0);
  EXPECT_NEAR((grad_f(q, zero) - q.c()).norm(), 0.0, 1e-15);
  EXPECT_NEAR((hess_matrix(q, zero) - q.G_sym()).norm(), 0.0, 1e-14);
}

TEST(Derivatives, HessianOperatorMatchesMatrix) {
  Rng rng(8);
  const StructuredQuartic q = harness::random_quartic(rng, 5, 9);
  const Vector x = harness::uniform_vector(rng, 5);
  const Vector h = harness::uniform_vector(rng, 5);
  const Matrix H = hess_matrix(q, x);
  EXPECT_NEAR((H - H.transpose()).norm(), 0.0, 1e-14);
  EXPECT_NEAR((hess_operator(q, x)(h) - H * h).norm(), 0.0, 1e-12);
  EXPECT_NEAR((hess_apply(q, x, h) - H * h).norm(), 0.0, 1e-12);
}

TEST(Derivatives, FiniteDifferenceSuite) {
  const auto r = harness::run_derivative_suite(2024, 50);
  EXPECT_EQ(r.instances, 50);
  EXPECT_LE(r.worst.grad_error, 1e-6);
  EXPECT_LE(r.worst.hess_error, 1e-6);
  EXPECT_LE(r.worst.third_error, 1e-5);
  EXPECT_LE(r.worst.fourth_error, 1e-3);
}

TEST(Derivatives, RejectWrongDimension) {
  const StructuredQuartic q = pure_quartic_1d();
  EXPECT_THROW(eval_f(q, Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(grad_f(q, Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(hess_apply(q, Vector::Zero(1), Vector::Zero(2)), InvalidArgument);
}

TEST(TaylorModel, ExactUpToQuarticRemainder) {
  Rng rng(11);
  for (int k = 0; k < 10; ++k) {
    const StructuredQuartic q = harness::random_quartic(rng, 4, 8);
    const auto r = harness::check_taylor_identity(q, rng, 100);
    EXPECT_TRUE(r.passed) << "worst " << r.worst;
  }
}

TEST(TaylorModel, TrivialAtCenter) {
  Rng rng(12);
  const StructuredQuartic q = harness::random_quartic(rng, 3, 5);
  const Metric metric = Metric::from_quartic(q);
  const Vector x = harness::uniform_vector(rng, 3);
  EXPECT_NEAR(taylor_phi(q, x, x), eval_f(q, x), 1e-13);
  EXPECT_NEAR(omega_eval(q, 1.0, metric, x, x), eval_f(q, x), 1e-13);
}

TEST(TaylorModel, OmegaUpperBoundsF) {
  Rng rng(13);
  for (int k = 0; k < 10; ++k) {
    const StructuredQuartic q = harness::random_quartic(rng, 3, 6);
    const Metric metric = Metric::from_quartic(q);
    EXPECT_TRUE(harness::check_model_upper_bound(q, metric, rng, 100).passed);
  }
}

TEST(TaylorModel, OmegaGradientMatchesFiniteDifferences) {
  Rng rng(14);
  const StructuredQuartic q = harness::random_quartic(rng, 4, 6);
  const Metric metric = Metric::from_quartic(q);
  const Vector x = harness::uniform_vector(rng, 4);
  const Vector y = harness::uniform_vector(rng, 4);
  const Vector g = omega_grad(q, 1.0, metric, x, y);
  const double step = 1e-5;
  for (int i = 0; i < 4; ++i) {
    Vector e = Vector::Zero(4);
    e[i] = step;
    const double fd = (omega_eval(q, 1.0, metric, x, y + e) - omega_eval(q, 1.0, metric, x, y - e)) /
                      (2.0 * step);
    EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(L4Regression, ZeroDataGivesZeroOptimum) {
  Rng rng(20);
  const Matrix A = harness::ridge_design(rng, 3, 6);
  const StructuredQuartic q = from_l4_regression(A, Vector::Zero(6), Vector::Zero(3));
  EXPECT_EQ(eval_f(q, Vector::Zero(3)), 0.0);
  EXPECT_EQ(grad_f(q, Vector::Zero(3)).norm(), 0.0);
  EXPECT_TRUE(q.T().entries().empty());
}

TEST(L4Regression, ObjectiveIdentity) {
  Rng rng(21);
  for (int k = 0; k < 5; ++k) {
    const Matrix A = harness::ridge_design(rng, 4, 9);
    const Vector b = harness::normal_vector(rng, 9);
    const Vector c = harness::normal_vector(rng, 4);
    const StructuredQuartic q = from_l4_regression(A, b, c);
    const double offset = b.array().pow(4).sum();
    for (int s = 0; s < 100; ++s) {
      const Vector x = harness::uniform_vector(rng, 4, -2.0, 2.0);
      const double direct = l4_objective(A, b, c, x);
      EXPECT_NEAR(eval_f(q, x) + offset, direct, 1e-10 * std::max(1.0, std::abs(direct)));
    }
  }
}

TEST(L4Regression, PlantedStationaryPoint) {
  Rng rng(22);
  const Matrix A = harness::ridge_design(rng, 3, 8);
  const Vector b = harness::normal_vector(rng, 8);
  const Vector x_star = harness::normal_vector(rng, 3);
  const Vector r = A * x_star - b;
  const Vector c = -4.0 * A.transpose() * r.array().cube().matrix();
  const StructuredQuartic q = from_l4_regression(A, b, c);
  const Metric metric = Metric::from_quartic(q);
  EXPECT_LE(metric.dual_norm(grad_f(q, x_star)), 1e-10 * std::max(1.0, c.norm()));
}

TEST(L4Regression, RejectsMismatchedData) {
  const Matrix A = Matrix::Identity(2, 2);
  EXPECT_THROW(from_l4_regression(A, Vector::Zero(3), Vector::Zero(2)), InvalidArgument);
  EXPECT_THROW(from_l4_regression(A, Vector::Zero(2), Vector::Zero(1)), InvalidArgument);
  Matrix singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  EXPECT_THROW(from_l4_regression(singular, Vector::Zero(2), Vector::Zero(2)),
               NotPositiveDefinite);
}

TEST(Smoothness, ConstantsForQuartic) {
  Rng rng(30);
  const StructuredQuartic q = harness::random_quartic(rng, 3, 10);
  const SmoothnessConstants sc = SmoothnessConstants::for_quartic(q);
  EXPECT_EQ(sc.l3, 1.0);
  EXPECT_DOUBLE_EQ(sc.mu4, 1.0 / 720.0);
  EXPECT_DOUBLE_EQ(sc.kappa4(), 720.0);
  EXPECT_GE(sc.kappa4(), 1.0);
}

TEST(Smoothness, ThirdDerivativeLipschitzInMetric) {
  Rng rng(31);
  for (int k = 0; k < 10; ++k) {
    const StructuredQuartic q = harness::random_quartic(rng, 3, 7);
    const Metric metric = Metric::from_quartic(q);
    EXPECT_TRUE(harness::check_third_order_smoothness(q, metric, rng, 100).passed);
  }
}

TEST(UniformConvexity, CorrectedModulusHolds) {
  Rng rng(32);
  for (int k = 0; k < 10; ++k) {
    const int n = 4 + k;
    const StructuredQuartic q = harness::convex_quartic(rng, 3, n);
    const Metric metric = Metric::from_quartic(q);
    EXPECT_TRUE(harness::check_uniform_convexity(q, metric, rng, 100, 1.0 / (72.0 * n)).passed);
    EXPECT_TRUE(harness::check_power_mean(n, rng, 100).passed);
  }
}

TEST(UniformConvexity, PrintedModulusFailsOnCounterexample) {
  const auto r = harness::printed_modulus_counterexample();
  EXPECT_TRUE(r.passed) << r.detail;
  // ||e1||_4^4 = 1 < n ||e1||_2^4 = 2
  Vector v = Vector::Zero(2);
  v[0] = 1.0;
  EXPECT_LT(v.array().pow(4).sum(), 2.0 * std::pow(v.squaredNorm(), 2));
}

TEST(UniformConvexity, ModelIsUniformlyConvex) {
  Rng rng(33);
  for (int k = 0; k < 10; ++k) {
    const StructuredQuartic q = harness::convex_quartic(rng, 3, 6);
    const Metric metric = Metric::from_quartic(q);
    EXPECT_TRUE(harness::check_model_uniform_convexity(q, metric, rng, 100).passed);
  }
}

TEST(StructuredQuartic, SparseRowsAgreeWithDense) {
  Rng rng(40);
  const int d = 20, n = 600;
  Matrix A = Matrix::Zero(n, d);
  for (int r = 0; r < n; ++r) A(r, r % d) = 1.0 + 0.01 * r;
  for (int r = 0; r < n; r += 7) A(r, (r + 3) % d) = -0.5;
  const StructuredQuartic q(harness::normal_vector(rng, d), Matrix::Zero(d, d),
                            SymmetricTensor3(d, {}), A);
  EXPECT_TRUE(q.uses_sparse_rows());
  const Vector x = harness::normal_vector(rng, d);
  const Vector ax = A * x;
  EXPECT_NEAR(eval_f(q, x), q.c().dot(x) + ax.array().pow(4).sum() / 24.0,
              1e-10 * std::abs(eval_f(q, x)));
  EXPECT_NEAR((q.weighted_gram(ax) - A.transpose() * ax.asDiagonal() * A).norm(), 0.0, 1e-9);
}
