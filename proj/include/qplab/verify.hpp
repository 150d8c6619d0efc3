#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qplab/io.hpp"

namespace qp {

struct VerifyOptions {
  int instances = 1000;  // per suite
  std::uint64_t seed = 0;
  double rel_slack = 1e-10;
  double tame_scale = 1.0;  // test hook: multiplies K(n, alpha) in the tame suite only
};

struct CheckRow {
  std::string suite;
  int instance = 0;
  std::string inequality;
  double alpha = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct SuiteResult {
  std::string name;
  int instances = 0;
  int checks = 0;
  int failures = 0;
  double worst_ratio = 0.0;  // max lhs / rhs over all checks
  json counterexample;       // first failing instance, replayable
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  std::vector<CheckRow> rows;
  bool pass() const;
};

// Randomized suites: tame, smoothing_rows, power, perturbation, hadamard,
// schur, determinant. Each instance draws from Rng(seed ^ hash(suite) + i).
VerifyReport run_verify(const VerifyOptions& opt);

} // namespace qp
