#include "fastquartic/harness/bench.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <memory>

#include "fastquartic/harness/generators.hpp"
#include "fastquartic/harness/propcheck.hpp"
#include "fastquartic/harness/reference.hpp"
#include "fastquartic/harness/trace.hpp"

namespace fq::harness {

std::optional<double> fit_loglog_slope(const std::vector<double>& x,
                                       const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

BenchReport run_bench(const BenchConfig& config) {
  BenchReport report;
  if (!config.trace_dir.empty()) std::filesystem::create_directories(config.trace_dir);
  for (int n : config.n_grid) {
    for (int r = 0; r < config.repeats; ++r) {
      BenchRow row;
      row.n = n;
      row.d = config.d;
      row.seed = config.seed + static_cast<std::uint64_t>(r);
      try {
        const Problem p = parse_problem(gen_instance(config.kind, config.d, n, row.seed));
        const Metric metric = Metric::from_quartic(p.quartic);
        row.f_offset = p.f_offset;
        if (p.f_star) row.f_star = *p.f_star;

        SolverConfig sc;
        sc.eps = config.eps;
        sc.eps_aam = config.eps_aam;
        sc.rho_min = config.rho_min;
        sc.max_epochs = config.max_epochs;
        std::unique_ptr<JsonlWriter> writer;
        if (!config.trace_dir.empty()) {
          writer = std::make_unique<JsonlWriter>(
              config.trace_dir + "/n" + std::to_string(n) + "_s" + std::to_string(row.seed) +
              ".jsonl");
          sc.on_trace = [&writer](const TraceRecord& t) { writer->write(to_json(t)); };
        }
        sc.on_step = [&row, &metric, &p, &sc](const StepOutcome& out, const AccelState& before,
                                              const TheoryBudget& budget) {
          if (out.kind != StepKind::accepted) return;
          ++row.rho_checks;
          if (!recheck_rho_band(p.quartic, metric, out, before, budget, sc)) ++row.rho_violations;
        };
        row.report = solve(p.quartic, metric, sc);
        row.ok = true;

        const Vector x0 = Vector::Zero(p.quartic.dim());
        if (config.baseline == "newton") {
          const ReferenceSolution ref = reference_newton(p.quartic, metric, x0);
          row.f_star = ref.f_star + p.f_offset;
          row.baseline_f = ref.f_star + p.f_offset;
          row.baseline_iterations = ref.iterations;
        } else if (config.baseline == "agd") {
          const BaselineResult b = agd_baseline(
              p.quartic, metric, x0, config.eps, SmoothnessConstants::for_quartic(p.quartic).mu4);
          row.baseline_f = b.f + p.f_offset;
          row.baseline_iterations = b.iterations;
          row.baseline_wall_nanos = b.wall_nanos;
        }
      } catch (const EpochCapExceeded& e) {
        row.report = e.report();
        row.error = e.what();
      } catch (const std::exception& e) {
        row.report.exit_reason = "failure";
        row.error = e.what();
      }
      if (!row.ok && row.report.exit_reason.empty()) row.report.exit_reason = "failure";
      report.rows.push_back(std::move(row));
    }
  }

  // One point per n: mean iteration count over the repeats that succeeded.
  std::map<int, std::pair<double, int>> per_n;
  for (const BenchRow& row : report.rows) {
    if (!row.ok) continue;
    auto& acc = per_n[row.n];
    acc.first += std::max(1, row.report.outer_iterations);
    acc.second += 1;
  }
  std::vector<double> xs, ys;
  for (const auto& [n, acc] : per_n) {
    xs.push_back(n);
    ys.push_back(acc.first / acc.second);
  }
  report.slope = fit_loglog_slope(xs, ys);
  return report;
}

nlohmann::json to_json(const BenchRow& row) {
  nlohmann::json j = summary_json(row.report, row.f_offset);
  j["n"] = row.n;
  j["d"] = row.d;
  j["seed"] = row.seed;
  j["status"] = row.ok ? "ok" : "failure";
  if (!row.error.empty()) j["error"] = row.error;
  j["rho_checks"] = row.rho_checks;
  j["rho_violations"] = row.rho_violations;
  if (row.f_star) j["f_star"] = *row.f_star;
  if (row.baseline_f) j["baseline_f"] = *row.baseline_f;
  if (row.baseline_iterations) j["baseline_iterations"] = *row.baseline_iterations;
  if (row.baseline_wall_nanos) j["baseline_wall_nanos"] = *row.baseline_wall_nanos;
  return j;
}

nlohmann::json summary_json(const BenchReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  int violations = 0;
  for (const BenchRow& row : report.rows) {
    rows.push_back(to_json(row));
    violations += row.rho_violations;
  }
  nlohmann::json summary = {{"instances", report.rows.size()}, {"rho_violations", violations}};
  summary["slope"] = report.slope ? nlohmann::json(*report.slope) : nlohmann::json(nullptr);
  return {{"rows", rows}, {"summary", summary}};
}

}  // namespace fq::harness
