#include "fastquartic/harness/trace.hpp"

#include "fastquartic/errors.hpp"
#include "fastquartic/harness/problem_io.hpp"

namespace fq::harness {

nlohmann::json to_json(const TraceRecord& r) {
  return {{"k", r.k},
          {"epoch", r.epoch},
          {"f", r.f},
          {"dual_grad_norm", r.dual_grad_norm},
          {"A_k", r.A_k},
          {"B_k", r.B_k},
          {"rho_k", r.rho_k},
          {"aux_iterations", r.aux_iterations},
          {"rho_evaluations", r.rho_evaluations},
          {"branch", r.branch},
          {"wall_nanos", r.wall_nanos},
          {"psi_min", r.psi_min}};
}

nlohmann::json summary_json(const SolveReport& r, double f_offset, bool with_x) {
  nlohmann::json j = {{"f_final", r.f_final + f_offset},
                      {"certified_gap", r.certified_gap},
                      {"outer_iterations", r.outer_iterations},
                      {"aux_iterations_total", r.aux_iterations_total},
                      {"linear_solves_total", r.linear_solves_total},
                      {"wall_nanos", r.wall_nanos},
                      {"exit_reason", r.exit_reason},
                      {"epochs", r.epochs}};
  if (with_x) j["x"] = to_json(r.x);
  return j;
}

JsonlWriter::JsonlWriter(const std::string& path) : out_(path) {
  if (!out_) throw InvalidArgument("cannot write trace file " + path);
}

void JsonlWriter::write(const nlohmann::json& record) {
  out_ << record.dump() << '\n';
  out_.flush();
}

}  // namespace fq::harness
