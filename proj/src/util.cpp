#include "hybseq/util.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace hybseq {

namespace {
std::atomic<int> g_thread_cap{0};
}

void set_thread_cap(int threads) { g_thread_cap.store(threads < 0 ? 0 : threads); }

int effective_threads() {
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  const int cap = g_thread_cap.load();
  return cap == 0 ? hw : std::min(cap, hw);
}

void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  const int workers = static_cast<int>(std::min<size_t>(effective_threads(), n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const size_t lo = n * w / workers;
      const size_t hi = n * (w + 1) / workers;
      for (size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hybseq
