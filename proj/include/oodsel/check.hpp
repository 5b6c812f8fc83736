#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oodsel {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;

  // "PASS 3 lower-bound inequality: ... (1.20 s)"
  std::string line() const;
};

struct CheckOptions {
  std::vector<int> only;  // empty runs every criterion
  std::uint64_t seed = 7;
  // Called after each criterion finishes, e.g. to stream output.
  std::function<void(const CheckResult&)> on_result;
};

// The analytic-oracle acceptance suite, criteria 1 through 8.
std::vector<CheckResult> run_paper_suite(const CheckOptions& opts = {});

}  // namespace oodsel
