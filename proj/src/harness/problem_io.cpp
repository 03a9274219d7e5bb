#include "fastquartic/harness/problem_io.hpp"

#include <fstream>
#include <sstream>

#include "fastquartic/errors.hpp"

namespace fq::harness {

namespace {

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(std::string("problem file: missing field '") + key + "'");
  return *it;
}

double number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) throw InvalidArgument(std::string(what) + ": expected a number");
  return j.get<double>();
}

}  // namespace

double Problem::file_objective(const Vector& x) const { return eval_f(quartic, x) + f_offset; }

Vector vector_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], what);
  return v;
}

Matrix matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(std::string(what) + ": expected rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw InvalidArgument(std::string(what) + ": rows must have equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], what);
    }
  }
  return m;
}

nlohmann::json to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Problem parse_problem(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("problem file: expected an object");
  std::optional<Problem> p;
  if (j.contains("b")) {
    L4Data data{matrix_from_json(field(j, "A"), "A"), vector_from_json(field(j, "b"), "b"),
                vector_from_json(field(j, "c"), "c")};
    StructuredQuartic q = from_l4_regression(data.A, data.b, data.c);
    const double offset = data.b.array().pow(4).sum();
    p.emplace(Problem{std::move(q), offset, std::move(data), std::nullopt, std::nullopt});
  } else {
    Vector c = vector_from_json(field(j, "c"), "c");
    Matrix G = matrix_from_json(field(j, "G"), "G");
    Matrix A = matrix_from_json(field(j, "A"), "A");
    const auto& tj = field(j, "T");
    if (!tj.is_array()) throw InvalidArgument("T: expected an array of [i,j,k,value]");
    std::vector<TensorEntry> entries;
    for (const auto& e : tj) {
      if (!e.is_array() || e.size() != 4) throw InvalidArgument("T: entries are [i,j,k,value]");
      for (int s = 0; s < 3; ++s) {
        if (!e[s].is_number_integer()) throw InvalidArgument("T: indices must be integers");
      }
      entries.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), number(e[3], "T")});
    }
    if (j.contains("d") && j["d"].get<long>() != c.size()) {
      throw InvalidArgument("problem file: d does not match the length of c");
    }
    if (j.contains("n") && j["n"].get<long>() != A.rows()) {
      throw InvalidArgument("problem file: n does not match the rows of A");
    }
    SymmetricTensor3 T(static_cast<int>(c.size()), std::move(entries));
    p.emplace(Problem{StructuredQuartic(std::move(c), std::move(G), std::move(T), std::move(A)),
                      0.0, std::nullopt, std::nullopt, std::nullopt});
  }
  if (j.contains("planted")) {
    const auto& pl = j["planted"];
    p->x_star = vector_from_json(field(pl, "x_star"), "planted.x_star");
    if (p->x_star->size() != p->quartic.dim()) throw InvalidArgument("planted.x_star: wrong length");
    p->f_star = number(field(pl, "f_star"), "planted.f_star");
  }
  return std::move(*p);
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open problem file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("problem file " + path + ": " + e.what());
  }
  try {
    return parse_problem(j);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("problem file " + path + ": " + e.what());
  }
}

nlohmann::json general_problem_json(const StructuredQuartic& q) {
  nlohmann::json t = nlohmann::json::array();
  for (const TensorEntry& e : q.T().entries()) t.push_back({e.i, e.j, e.k, e.value});
  return {{"d", q.dim()}, {"n", q.rows()}, {"c", to_json(q.c())},
          {"G", to_json(q.G())}, {"T", t},      {"A", to_json(q.A())}};
}

nlohmann::json l4_problem_json(const L4Data& data) {
  return {{"A", to_json(data.A)}, {"b", to_json(data.b)}, {"c", to_json(data.c)}};
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << j.dump() << '\n';
}

}  // namespace fq::harness
