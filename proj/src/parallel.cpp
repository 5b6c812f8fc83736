#include "oodsel/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace oodsel {
namespace {
std::atomic<int> g_threads{0};
}

void set_num_threads(int n) { g_threads.store(std::max(n, 0)); }

int hardware_threads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

int num_threads() {
  const int n = g_threads.load();
  return n > 0 ? n : hardware_threads();
}

}  // namespace oodsel
