#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

#include "fastquartic/harness/problem_io.hpp"
#include "fastquartic/quartic.hpp"

namespace fq::harness {

using Rng = std::mt19937_64;

/// Entries uniform in [lo, hi].
Vector uniform_vector(Rng& rng, int size, double lo = -1.0, double hi = 1.0);
Vector normal_vector(Rng& rng, int size, double scale = 1.0);

/// n x d: n - d rows i.i.d. N(0, 1/d) stacked on 0.5 I, so A'A >= 0.25 I.
Matrix ridge_design(Rng& rng, int d, int n);

/// Generated instance file; kind is "l4", "planted" or "dense-quartic".
/// Planted instances carry {"planted": {"x_star", "f_star"}}. d = n = 1 gives
/// the single-row instance A = [[1]] with every other coefficient zero.
/// Throws InvalidArgument unless n >= d >= 1.
nlohmann::json gen_instance(const std::string& kind, int d, int n, std::uint64_t seed);

/// Planted l4 instance: c = -4 A'((A x* - b)^3) makes x* the minimizer.
Problem planted_problem(int d, int n, std::uint64_t seed);

/// Arbitrary (generally nonconvex) quartic with coefficients in [-1, 1], for
/// derivative checks.
StructuredQuartic random_quartic(Rng& rng, int d, int n);

/// Convex quartic: an l4 expansion plus a PSD quadratic, in general form.
StructuredQuartic convex_quartic(Rng& rng, int d, int n);

}  // namespace fq::harness
