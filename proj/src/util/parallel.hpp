#pragma once
// Deterministic work-sharing: run f(i) for i in [0, n) on up to `jobs`
// threads.  Callers write results into pre-sized per-index slots and reduce
// them in index order afterwards, so the outcome never depends on the thread
// count.

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace iso::util {

template <typename F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(jobs));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace iso::util
