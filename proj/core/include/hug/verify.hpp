#pragma once

#include <string>
#include <vector>

namespace hug {

// Theorem-verification suites: each one checks a closed-form or asymptotic
// statement numerically and reports measured value, target, tolerance and a
// pass flag. Failures are reported, never thrown.

enum class VerifySuite {
  Etf,
  CrossPolytope,
  Asymptotic,
  InitEnergy,
  EnergyOrder,
  MhsLimit,
  CeBounds,
  SurrogateBound,
};

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool all_pass = true;
};

SuiteReport verify(VerifySuite suite);

std::string verify_suite_name(VerifySuite suite);
VerifySuite verify_suite_from_name(const std::string& name);
std::vector<VerifySuite> all_verify_suites();

std::string to_json(const SuiteReport& report, int indent = -1);

}  // namespace hug
