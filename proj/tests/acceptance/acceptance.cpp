// Acceptance gate: one PASS/FAIL line per criterion; nonzero exit if any fail.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "oodsel/check.hpp"
#include "oodsel/parallel.hpp"

int main(int argc, char** argv) {
  oodsel::CheckOptions opts;
  for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  if (const char* env = std::getenv("OODSEL_THREADS")) oodsel::set_num_threads(std::atoi(env));
  opts.on_result = [](const oodsel::CheckResult& r) {
    std::printf("%s\n", r.line().c_str());
    std::fflush(stdout);
  };
  int failed = 0;
  for (const auto& r : oodsel::run_paper_suite(opts)) failed += r.passed ? 0 : 1;
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
