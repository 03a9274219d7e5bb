#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "fastquartic/errors.hpp"
#include "fastquartic/harness/bench.hpp"
#include "fastquartic/harness/derivcheck.hpp"
#include "fastquartic/harness/generators.hpp"
#include "fastquartic/harness/problem_io.hpp"
#include "fastquartic/harness/propcheck.hpp"
#include "fastquartic/harness/reference.hpp"
#include "fastquartic/harness/trace.hpp"

using namespace fq;
using namespace fq::harness;

TEST(Generators, SameSeedSameBytes) {
  for (const char* kind : {"l4", "planted", "dense-quartic"}) {
    EXPECT_EQ(gen_instance(kind, 3, 7, 99).dump(), gen_instance(kind, 3, 7, 99).dump()) << kind;
    EXPECT_NE(gen_instance(kind, 3, 7, 99).dump(), gen_instance(kind, 3, 7, 100).dump()) << kind;
  }
}

TEST(Generators, PlantedPointIsStationary) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Problem p = planted_problem(6, 20, seed);
    const Metric m = Metric::from_quartic(p.quartic);
    EXPECT_LE(m.dual_norm(grad_f(p.quartic, *p.x_star)), 1e-10);
    EXPECT_NEAR(p.file_objective(*p.x_star), *p.f_star, 1e-10 * (1.0 + std::abs(*p.f_star)));
  }
}

TEST(Generators, SingleRowInstance) {
  const Problem p = parse_problem(gen_instance("l4", 1, 1, 3));
  EXPECT_EQ(p.quartic.dim(), 1);
  ASSERT_TRUE(p.l4.has_value());
  EXPECT_EQ(p.l4->A(0, 0), 1.0);
  // the quartic form rescales rows so that (1/24)||A x||_4^4 = ||x||_4^4
  EXPECT_NEAR(p.quartic.A()(0, 0), std::pow(24.0, 0.25), 1e-15);
  EXPECT_EQ(eval_f(p.quartic, Vector::Zero(1)), 0.0);
}

TEST(Generators, RejectsBadShapes) {
  EXPECT_THROW(gen_instance("l4", 0, 4, 1), InvalidArgument);
  EXPECT_THROW(gen_instance("l4", 5, 4, 1), InvalidArgument);
  EXPECT_THROW(gen_instance("cubic", 2, 4, 1), InvalidArgument);
}

TEST(Generators, RidgeDesignIsWellConditioned) {
  Rng rng(4);
  const Matrix A = ridge_design(rng, 5, 30);
  Eigen::SelfAdjointEigenSolver<Matrix> es(A.transpose() * A);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.25 - 1e-12);
}

TEST(ProblemIo, GeneralRoundTrip) {
  Rng rng(5);
  const StructuredQuartic q = random_quartic(rng, 3, 6);
  const Problem p = parse_problem(general_problem_json(q));
  const Vector x = uniform_vector(rng, 3);
  EXPECT_NEAR(eval_f(p.quartic, x), eval_f(q, x), 1e-12);
  EXPECT_EQ(p.f_offset, 0.0);
}

TEST(ProblemIo, L4RoundTripAndOffset) {
  Rng rng(6);
  L4Data data{ridge_design(rng, 3, 8), normal_vector(rng, 8), normal_vector(rng, 3)};
  const Problem p = parse_problem(l4_problem_json(data));
  ASSERT_TRUE(p.l4.has_value());
  const Vector x = normal_vector(rng, 3);
  EXPECT_NEAR(p.file_objective(x), l4_objective(data.A, data.b, data.c, x), 1e-10);
  EXPECT_NEAR(p.f_offset, data.b.array().pow(4).sum(), 1e-12);
}

TEST(ProblemIo, MalformedInputIsRejected) {
  nlohmann::json j = gen_instance("l4", 2, 4, 1);
  j.erase("b");
  EXPECT_THROW(parse_problem(j), InvalidArgument);
  EXPECT_THROW(parse_problem(nlohmann::json::parse("[1, 2]")), InvalidArgument);
  nlohmann::json bad = gen_instance("l4", 2, 4, 1);
  bad["c"] = {1.0, 2.0, 3.0};
  EXPECT_THROW(parse_problem(bad), InvalidArgument);
  EXPECT_THROW(load_problem("/nonexistent/problem.json"), InvalidArgument);
}

TEST(ProblemIo, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "fastquartic_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "p.json").string();
  write_json_file(path, gen_instance("planted", 2, 5, 8));
  const Problem p = load_problem(path);
  EXPECT_TRUE(p.x_star.has_value());
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_problem(path), InvalidArgument);
  std::filesystem::remove_all(dir);
}

TEST(Reference, RecoversPlantedMinimizer) {
  const Problem p = planted_problem(5, 16, 9);
  const Metric m = Metric::from_quartic(p.quartic);
  const ReferenceSolution ref = reference_newton(p.quartic, m, Vector::Zero(5));
  EXPECT_LE(m.b_norm(ref.x_star - *p.x_star), 1e-8);
  EXPECT_LE(ref.grad_dual_norm, 1e-11);
}

TEST(Reference, OneDimensionalFromThree) {
  // f = x^4/24 - x, minimizer x = 6^{1/3}
  const StructuredQuartic q(-Vector::Ones(1), Matrix::Zero(1, 1), SymmetricTensor3(1, {}),
                            Matrix::Ones(1, 1));
  const Metric m = Metric::from_quartic(q);
  const ReferenceSolution ref = reference_newton(q, m, Vector::Constant(1, 3.0));
  EXPECT_NEAR(ref.x_star[0], std::cbrt(6.0), 1e-10);
}

TEST(Reference, RejectsUnreachableTolerance) {
  const Problem p = planted_problem(2, 4, 1);
  const Metric m = Metric::from_quartic(p.quartic);
  EXPECT_THROW(reference_newton(p.quartic, m, Vector::Zero(2), 1e-14), InvalidArgument);
}

TEST(Reference, AcceleratedGradientBaselineConverges) {
  const Problem p = planted_problem(4, 12, 10);
  const Metric m = Metric::from_quartic(p.quartic);
  const double mu4 = SmoothnessConstants::for_quartic(p.quartic).mu4;
  const BaselineResult b = agd_baseline(p.quartic, m, Vector::Zero(4), 1e-6, mu4);
  EXPECT_TRUE(b.converged);
  EXPECT_LE(b.f - eval_f(p.quartic, *p.x_star), 1e-6);
}

TEST(DerivCheck, SuitePasses) {
  const DerivSuiteResult r = run_derivative_suite(17, 20);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.instances, 20);
}

TEST(DerivCheck, ZeroToleranceIsTooStrict) {
  Rng rng(18);
  const StructuredQuartic q = random_quartic(rng, 3, 5);
  const DerivCheckResult r = check_derivatives(q, uniform_vector(rng, 3), uniform_vector(rng, 3));
  EXPECT_TRUE(r.passed({}));
  EXPECT_GT(r.grad_error, 0.0);
  EXPECT_FALSE(r.passed({0.0, 0.0, 0.0, 0.0}));
}

TEST(PropCheck, SuitePasses) {
  for (const PropertyResult& r : run_property_suite(19, 2)) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.detail;
    if (r.name != "early-exit-guarantee") EXPECT_GT(r.checked, 0) << r.name;
  }
}

TEST(PropCheck, PrintedModulusFailsCorrectedHolds) {
  const PropertyResult r = printed_modulus_counterexample();
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Bench, EmptyGridIsEmptyReport) {
  BenchConfig cfg;
  const BenchReport r = run_bench(cfg);
  EXPECT_TRUE(r.rows.empty());
  EXPECT_FALSE(r.slope.has_value());
  const auto j = summary_json(r);
  EXPECT_EQ(j["summary"]["instances"], 0);
  EXPECT_TRUE(j["summary"]["slope"].is_null());
}

TEST(Bench, SmallGridWithNewtonBaseline) {
  BenchConfig cfg;
  cfg.n_grid = {8, 16};
  cfg.d = 3;
  cfg.baseline = "newton";
  const BenchReport r = run_bench(cfg);
  ASSERT_EQ(r.rows.size(), 2u);
  ASSERT_TRUE(r.slope.has_value());
  for (const BenchRow& row : r.rows) {
    EXPECT_TRUE(row.ok) << row.error;
    ASSERT_TRUE(row.f_star.has_value());
    EXPECT_LE(row.report.f_final + row.f_offset - *row.f_star, 2.0 * cfg.eps);
    EXPECT_EQ(row.rho_violations, 0);
    EXPECT_GT(row.rho_checks, 0);
  }
}

TEST(Bench, LogLogSlopeOfPowerLaw) {
  const std::vector<double> x = {16, 64, 256, 1024};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 0.25));
  EXPECT_NEAR(*fit_loglog_slope(x, y), 0.25, 1e-12);
  EXPECT_FALSE(fit_loglog_slope({4.0}, {2.0}).has_value());
  EXPECT_FALSE(fit_loglog_slope({4.0, 4.0}, {2.0, 3.0}).has_value());
}

TEST(Trace, RecordAndSummaryKeys) {
  TraceRecord rec;
  rec.branch = "accepted";
  const auto j = to_json(rec);
  for (const char* key : {"k", "epoch", "f", "dual_grad_norm", "A_k", "B_k", "rho_k",
                          "aux_iterations", "rho_evaluations", "branch", "wall_nanos", "psi_min"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  SolveReport r;
  r.x = Vector::Ones(2);
  r.f_final = 1.0;
  const auto s = summary_json(r, 2.5, true);
  EXPECT_DOUBLE_EQ(s["f_final"].get<double>(), 3.5);
  EXPECT_EQ(s["x"].size(), 2u);
  EXPECT_FALSE(summary_json(r).contains("x"));
}
