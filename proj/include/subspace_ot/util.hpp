#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace sot {

// splitmix64 finalizer, used to decorrelate (seed, stream) pairs before
// feeding them to mt19937_64.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(mix_seed(seed, stream));
}

// Runs fn(i) for i in [0, n). Tasks are distributed over at most
// `threads` workers; results must be written to per-index slots so the
// outcome does not depend on scheduling.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Worker cap resolution: explicit flag wins, then SUBSPACE_OT_THREADS, then
// hardware concurrency.
unsigned resolve_thread_cap(int flag_value);

}  // namespace sot
