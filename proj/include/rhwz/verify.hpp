#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rhwz {

struct SuiteReport {
  std::string suite;
  int count = 0;
  int passed = 0;
  double worst = 0;      // worst normalized error over the samples
  double tolerance = 0;  // the bound the worst error is held to
  std::vector<std::string> failures;

  bool ok() const { return passed == count; }
};

std::vector<std::string> suite_names();
int default_count(const std::string& suite);
// Property suite by name: bruhat, cholesky, three-form, flatness, counterterm.
SuiteReport run_suite(const std::string& suite, int count, std::uint64_t seed, int threads = 1);

}  // namespace rhwz
