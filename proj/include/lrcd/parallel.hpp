#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace lrcd {

inline std::size_t resolve_workers(std::size_t workers) {
  if (workers != 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

// Runs fn(i) for i in [0, count) and collects results indexed by i. The
// reduction order is the index order regardless of the worker count, so
// downstream output is schedule-independent.
template <typename T>
std::vector<T> parallel_map(std::size_t count, std::size_t workers,
                            const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(count);
  workers = std::min(resolve_workers(workers), count == 0 ? std::size_t{1} : count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace lrcd
