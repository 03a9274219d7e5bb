#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "fastquartic/quartic.hpp"
#include "fastquartic/types.hpp"

namespace fq::harness {

struct L4Data {
  Matrix A;
  Vector b;
  Vector c;
};

/// A problem as read from disk. Objective values in `f_offset`, `f_star` and
/// reported results use the file's own objective, so for the l4 form
/// f_file(x) = eval_f(quartic, x) + f_offset with f_offset = ||b||_4^4.
struct Problem {
  StructuredQuartic quartic;
  double f_offset = 0.0;
  std::optional<L4Data> l4;
  std::optional<Vector> x_star;
  std::optional<double> f_star;

  double file_objective(const Vector& x) const;
};

/// Accepts both the general form {d, n, c, G, T, A} and the l4 form {A, b, c}.
/// An optional "planted" object {x_star, f_star} is carried along.
/// Throws InvalidArgument on malformed input.
Problem parse_problem(const nlohmann::json& j);
Problem load_problem(const std::string& path);

nlohmann::json general_problem_json(const StructuredQuartic& q);
nlohmann::json l4_problem_json(const L4Data& data);

Vector vector_from_json(const nlohmann::json& j, const char* what);
Matrix matrix_from_json(const nlohmann::json& j, const char* what);
nlohmann::json to_json(const Vector& v);
nlohmann::json to_json(const Matrix& m);

/// Writes `j` followed by a newline.
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace fq::harness
