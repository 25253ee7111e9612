#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

#include "sepcone/types.hpp"

namespace sepcone {

/// Worker cap: SEPCONE_THREADS when set, else hardware concurrency.
inline unsigned thread_cap() {
  if (const char* env = std::getenv("SEPCONE_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs f(i) for i in [0, count). Jobs must be independent (results written
/// to per-index slots); outputs are then identical for any thread count.
template <typename F>
void parallel_for_indexed(Index count, F&& f) {
  const unsigned workers =
      std::min<unsigned>(thread_cap(), static_cast<unsigned>(std::max<Index>(count, 1)));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Index i = static_cast<Index>(w); i < count; i += workers) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sepcone
