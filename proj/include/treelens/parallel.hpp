#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace treelens {

inline int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(begin, end, chunk_index) over [0, total) split into fixed-size
// chunks. Chunk boundaries depend only on `total`, never on the worker
// count, so per-chunk partial results combined in chunk order are identical
// for any thread count. Exceptions propagate to the caller.
template <class Fn>
void for_chunks(std::size_t total, int threads, std::size_t chunk_size, Fn&& fn) {
  if (total == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
  if (threads <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
      const std::size_t b = c * chunk_size;
      fn(b, std::min(total, b + chunk_size), c);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      const std::size_t b = c * chunk_size;
      try {
        fn(b, std::min(total, b + chunk_size), c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const int n_workers = std::min<std::size_t>(threads, n_chunks);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Map-reduce over [0, total): each chunk folds into its own accumulator
// (seeded by make()), accumulators are combined left-to-right in chunk
// order. combine must be associative for the result to be thread-count
// independent; max/min with deterministic tie-breaks qualify.
template <class Acc, class Make, class Fold, class Combine>
Acc parallel_reduce(std::size_t total, int threads, std::size_t chunk_size,
                    Make&& make, Fold&& fold, Combine&& combine) {
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks =
      total == 0 ? 0 : (total + chunk_size - 1) / chunk_size;
  std::vector<Acc> partial(n_chunks, make());
  for_chunks(total, threads, chunk_size,
             [&](std::size_t b, std::size_t e, std::size_t c) {
               for (std::size_t i = b; i < e; ++i) fold(partial[c], i);
             });
  Acc out = make();
  for (auto& p : partial) combine(out, p);
  return out;
}

}  // namespace treelens
