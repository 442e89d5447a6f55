// parallel.hpp - index-ordered worker pool
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace polariton {

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// Evaluates fn(i) for i in [0, n) on up to `workers` threads. Results come back in index
// order, so any later reduction is independent of scheduling. The exception of the
// lowest failing index is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, unsigned workers, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using R = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < w; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace polariton
