#ifndef PANELSEG_PARALLEL_HPP
#define PANELSEG_PARALLEL_HPP

#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace panelseg {

// Resolve a thread-count request: explicit value wins, else PANELSEG_THREADS,
// else hardware concurrency.  Results are independent of the choice by design;
// only wall time changes.
inline int resolve_threads(long requested) {
  if (requested > 0) return static_cast<int>(requested);
  if (const char* env = std::getenv("PANELSEG_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Strided parallel map over [0, count).  fn(i) must write only to slot i of
// any shared output so the result is identical for every thread count.
template <typename Fn>
void parallel_for(long count, int threads, Fn&& fn) {
  if (count <= 0) return;
  int k = threads;
  if (k > count) k = static_cast<int>(count);
  if (k <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(k));
  pool.reserve(static_cast<size_t>(k));
  for (int w = 0; w < k; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (long i = w; i < count; i += k) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace panelseg

#endif  // PANELSEG_PARALLEL_HPP
