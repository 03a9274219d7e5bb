#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fastquartic/types.hpp"

namespace fq {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A linear or scalar solve did not reach its residual target.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// An iterative method ran out of budget before its stopping certificate held.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, Vector best, double certified_gap)
      : std::runtime_error(what), best_(std::move(best)), certified_gap_(certified_gap) {}
  const Vector& best_iterate() const { return best_; }
  double certified_gap() const { return certified_gap_; }

 private:
  Vector best_;
  double certified_gap_;
};

struct BisectionLogEntry {
  double rho;
  double zeta;
  double rho_lo;
  double rho_hi;
  std::string branch;
};

// The post-condition of the rho search could not be re-verified.
class SearchFailure : public std::runtime_error {
 public:
  SearchFailure(const std::string& what, std::vector<BisectionLogEntry> log)
      : std::runtime_error(what), log_(std::move(log)) {}
  const std::vector<BisectionLogEntry>& log() const { return log_; }

 private:
  std::vector<BisectionLogEntry> log_;
};

// A runtime-checked inequality of the accelerated method failed.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ground-truth oracle (reference Newton) could not make progress.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fq
