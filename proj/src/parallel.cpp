#include "splinegrad/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace splinegrad {

namespace {
std::atomic<int> g_threads{1};
}

int num_threads() { return g_threads.load(std::memory_order_relaxed); }

void set_num_threads(int n) { g_threads.store(std::max(1, n), std::memory_order_relaxed); }

void parallel_chunks(std::size_t count,
                     const std::function<void(int, std::size_t, std::size_t)>& fn) {
  const int workers = std::min<std::size_t>(num_threads(), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    fn(0, 0, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t base = count / workers;
  const std::size_t rem = count % workers;
  std::size_t begin = 0;
  for (int c = 0; c < workers; ++c) {
    const std::size_t len = base + (static_cast<std::size_t>(c) < rem ? 1 : 0);
    pool.emplace_back(fn, c, begin, begin + len);
    begin += len;
  }
  for (auto& t : pool) t.join();
}

}  // namespace splinegrad
