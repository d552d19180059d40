// SPDX-License-Identifier: Apache-2.0
//
// Deterministic block-parallel execution: work items are partitioned into
// fixed-size blocks whose boundaries do not depend on the thread count, each
// block is processed serially by whichever thread claims it, and callers
// fold per-block results in block order. The reduction is therefore
// bit-identical for any number of threads.
#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace matwalk {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw > 16 ? 16 : hw);
}

constexpr std::size_t kDefaultBlock = 64;

// fn(block_index, item_begin, item_end) must only touch state owned by its
// block. Exceptions are rethrown (first one wins) after all threads join.
inline void for_each_block(
    std::size_t n_items, std::size_t block_size, int threads,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n_items == 0) return;
  if (block_size == 0) block_size = kDefaultBlock;
  const std::size_t n_blocks = (n_items + block_size - 1) / block_size;
  threads = resolve_threads(threads);

  auto run_block = [&](std::size_t b) {
    const std::size_t lo = b * block_size;
    const std::size_t hi = std::min(n_items, lo + block_size);
    fn(b, lo, hi);
  };

  if (threads <= 1 || n_blocks == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  const int n_workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks));
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= n_blocks || failed.load()) return;
        try {
          run_block(b);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

[[nodiscard]] inline std::size_t block_count(std::size_t n_items,
                                             std::size_t block_size) {
  if (block_size == 0) block_size = kDefaultBlock;
  return (n_items + block_size - 1) / block_size;
}

}  // namespace matwalk
