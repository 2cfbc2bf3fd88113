#pragma once

// Named property suites over the reference profile REF(-0.9 pi, 0.1):
// generation, values, index, chains, invariance, algebra.

#include <cstdint>
#include <string>
#include <vector>

namespace gfs {

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;  // max residual (0 for exact checks)
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteOptions {
  int workers = 1;
  std::uint64_t seed = 20240531;
};

const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);
// Throws InvalidArgument for an unknown suite.
std::vector<CheckResult> run_suite(const std::string& name, const SuiteOptions& opt = {});

}  // namespace gfs
