#include "ktg/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ktg {

namespace {
std::atomic<int> g_default_workers{0};
}

int default_workers() {
  int w = g_default_workers.load();
  if (w > 0) return w;
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void set_default_workers(int workers) {
  g_default_workers.store(workers > 0 ? workers : 0);
}

void parallel_for(Eigen::Index count, const std::function<void(Eigen::Index)>& fn,
                  int workers) {
  if (count <= 0) return;
  int n_workers = workers > 0 ? workers : default_workers();
  if (n_workers > count) n_workers = static_cast<int>(count);

  if (n_workers <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<Eigen::Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      Eigen::Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ktg
