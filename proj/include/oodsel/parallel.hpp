#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace oodsel {

// Worker count used by every parallel loop in the library. 0 selects the
// hardware concurrency.
void set_num_threads(int n);
int num_threads();
int hardware_threads();

// Runs body(i) for i in [0, n). Each index writes only its own output slot,
// so results do not depend on the worker count. If several bodies throw, the
// exception from the lowest index is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  if (n == 0) return;
  std::vector<std::exception_ptr> errors(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(num_threads())
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace oodsel
