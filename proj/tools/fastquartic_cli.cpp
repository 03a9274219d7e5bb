// Command-line front end: solve, bench, derivcheck, propcheck, gen.
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fastquartic/errors.hpp"
#include "fastquartic/fast_quartic.hpp"
#include "fastquartic/harness/bench.hpp"
#include "fastquartic/harness/derivcheck.hpp"
#include "fastquartic/harness/generators.hpp"
#include "fastquartic/harness/problem_io.hpp"
#include "fastquartic/harness/propcheck.hpp"
#include "fastquartic/harness/reference.hpp"
#include "fastquartic/harness/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitSolver = 3;
constexpr int kExitProperty = 4;

struct Options {
  std::string input;
  std::string out;
  double eps = 1e-8;
  std::optional<double> eps_aam;
  std::optional<double> rho_min;
  int max_epochs = 200;
  std::uint64_t seed = 1;
  std::string baseline = "none";
  bool trace = false;
  std::string n_grid = "16,64,256,1024";
  int dim = 8;
  int n = 16;
  int instances = 50;
  int repeats = 1;
  std::string kind = "planted";
};

void emit(const Options& opt, const nlohmann::json& j) {
  if (opt.out.empty()) {
    std::cout << j.dump() << '\n';
  } else {
    fq::harness::write_json_file(opt.out, j);
  }
}

std::string trace_path(const Options& opt) {
  return opt.out.empty() ? std::string("trace.jsonl") : opt.out + ".trace.jsonl";
}

int run_solve(const Options& opt) {
  using namespace fq;
  const harness::Problem p = harness::load_problem(opt.input);
  const Metric metric = Metric::from_quartic(p.quartic);
  SolverConfig config;
  config.eps = opt.eps;
  config.eps_aam = opt.eps_aam;
  config.rho_min = opt.rho_min;
  config.max_epochs = opt.max_epochs;
  std::unique_ptr<harness::JsonlWriter> writer;
  if (opt.trace) {
    writer = std::make_unique<harness::JsonlWriter>(trace_path(opt));
    config.on_trace = [&writer](const TraceRecord& r) { writer->write(harness::to_json(r)); };
  }

  nlohmann::json summary;
  int code = kExitOk;
  try {
    const SolveReport report = solve(p.quartic, metric, config);
    summary = harness::summary_json(report, p.f_offset, true);
  } catch (const EpochCapExceeded& e) {
    summary = harness::summary_json(e.report(), p.f_offset, true);
    summary["error"] = e.what();
    code = kExitSolver;
  } catch (const ConvergenceFailure& e) {
    summary = {{"exit_reason", "failure"},
               {"error", e.what()},
               {"certified_gap", e.certified_gap()},
               {"x", harness::to_json(e.best_iterate())}};
    code = kExitSolver;
  }
  if (p.f_star) summary["f_star"] = *p.f_star;

  const Vector x0 = Vector::Zero(p.quartic.dim());
  if (opt.baseline == "newton") {
    const harness::ReferenceSolution ref = harness::reference_newton(p.quartic, metric, x0);
    summary["baseline"] = {{"name", "newton"},
                           {"f", ref.f_star + p.f_offset},
                           {"iterations", ref.iterations}};
    if (!p.f_star) summary["f_star"] = ref.f_star + p.f_offset;
  } else if (opt.baseline == "agd") {
    const harness::BaselineResult b = harness::agd_baseline(
        p.quartic, metric, x0, opt.eps, SmoothnessConstants::for_quartic(p.quartic).mu4);
    summary["baseline"] = {{"name", "agd"},
                           {"f", b.f + p.f_offset},
                           {"iterations", b.iterations},
                           {"converged", b.converged},
                           {"wall_nanos", b.wall_nanos}};
  }
  emit(opt, summary);
  return code;
}

// "16,64,256" -> {16, 64, 256}; an empty string is an empty grid.
std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || value < 1) {
      throw fq::InvalidArgument("bench: bad --n-grid entry '" + item + "'");
    }
    grid.push_back(value);
  }
  return grid;
}

int run_bench(const Options& opt) {
  fq::harness::BenchConfig config;
  config.n_grid = parse_grid(opt.n_grid);
  config.d = opt.dim;
  config.eps = opt.eps;
  config.seed = opt.seed;
  config.repeats = opt.repeats;
  config.kind = opt.kind;
  config.baseline = opt.baseline;
  config.eps_aam = opt.eps_aam;
  config.rho_min = opt.rho_min;
  config.max_epochs = opt.max_epochs;
  if (opt.trace) config.trace_dir = opt.out.empty() ? "traces" : opt.out + ".traces";
  const fq::harness::BenchReport report = fq::harness::run_bench(config);
  emit(opt, fq::harness::summary_json(report));
  return kExitOk;
}

nlohmann::json deriv_json(const fq::harness::DerivSuiteResult& r) {
  return {{"instances", r.instances},
          {"grad_error", r.worst.grad_error},
          {"hess_error", r.worst.hess_error},
          {"third_error", r.worst.third_error},
          {"fourth_error", r.worst.fourth_error},
          {"passed", r.passed}};
}

int run_derivcheck(const Options& opt) {
  fq::harness::DerivSuiteResult r;
  if (opt.input.empty()) {
    r = fq::harness::run_derivative_suite(opt.seed, opt.instances);
  } else {
    const fq::harness::Problem p = fq::harness::load_problem(opt.input);
    r = fq::harness::check_problem_derivatives(p.quartic, opt.seed, opt.instances);
  }
  emit(opt, deriv_json(r));
  return r.passed ? kExitOk : kExitProperty;
}

int run_propcheck(const Options& opt) {
  const auto results = fq::harness::run_property_suite(opt.seed, opt.instances);
  nlohmann::json props = nlohmann::json::array();
  bool all = true;
  for (const auto& r : results) {
    props.push_back(fq::harness::to_json(r));
    all = all && r.passed;
  }
  emit(opt, {{"properties", props}, {"passed", all}});
  return all ? kExitOk : kExitProperty;
}

int run_gen(const Options& opt) {
  emit(opt, fq::harness::gen_instance(opt.kind, opt.dim, opt.n, opt.seed));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated tensor-method solver for structured convex quartics"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--out", opt.out, "Output file (default: stdout)");
    sub->add_option("--seed", opt.seed, "Random seed");
  };
  auto add_solver = [&opt](CLI::App* sub) {
    sub->add_option("--eps", opt.eps, "Target accuracy")->check(CLI::PositiveNumber);
    sub->add_option("--eps-aam", opt.eps_aam, "Inner solver tolerance override")
        ->check(CLI::PositiveNumber);
    sub->add_option("--rho-min", opt.rho_min, "Lower rho bracket override")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-epochs", opt.max_epochs, "Restart epoch cap")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--baseline", opt.baseline, "Comparator run")
        ->check(CLI::IsMember({"none", "agd", "newton"}));
    sub->add_flag("--trace", opt.trace, "Write JSONL per-iteration traces");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one problem file");
  solve_cmd->add_option("input", opt.input, "Problem file")->required();
  add_common(solve_cmd);
  add_solver(solve_cmd);

  CLI::App* bench_cmd = app.add_subcommand("bench", "Run the solver across an n-grid");
  add_common(bench_cmd);
  add_solver(bench_cmd);
  bench_cmd->add_option("--n-grid", opt.n_grid, "Comma-separated row counts");
  bench_cmd->add_option("--dim", opt.dim, "Dimension d")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--kind", opt.kind, "Instance kind")
      ->check(CLI::IsMember({"l4", "planted", "dense-quartic"}));
  bench_cmd->add_option("--repeats", opt.repeats, "Instances per grid point")
      ->check(CLI::PositiveNumber);

  CLI::App* deriv_cmd = app.add_subcommand("derivcheck", "Finite-difference derivative checks");
  deriv_cmd->add_option("input", opt.input, "Problem file (default: random instances)");
  deriv_cmd->add_option("--instances", opt.instances, "Instances or sample points")
      ->check(CLI::PositiveNumber);
  add_common(deriv_cmd);

  CLI::App* prop_cmd = app.add_subcommand("propcheck", "Inequality property suite");
  prop_cmd->add_option("--instances", opt.instances, "Random instances")
      ->check(CLI::PositiveNumber);
  add_common(prop_cmd);

  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate an instance file");
  gen_cmd->add_option("--kind", opt.kind, "Instance kind")
      ->check(CLI::IsMember({"l4", "planted", "dense-quartic"}));
  gen_cmd->add_option("--dim", opt.dim, "Dimension d");
  gen_cmd->add_option("--n", opt.n, "Rows n");
  add_common(gen_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*solve_cmd) return run_solve(opt);
    if (*bench_cmd) return run_bench(opt);
    if (*deriv_cmd) return run_derivcheck(opt);
    if (*prop_cmd) return run_propcheck(opt);
    if (*gen_cmd) return run_gen(opt);
  } catch (const fq::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const fq::NotPositiveDefinite& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitInvalid;
}
