#pragma once

#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace tpfem {

/// Splits [begin, end) into at most `threads` contiguous chunks and runs
/// `f(i)` for every index.  Workers write only to slots derived from their own
/// indices, so results are independent of the thread count; exceptions thrown
/// by workers are rethrown (the one from the lowest-numbered chunk wins).
template <class F>
void parallel_for(int begin, int end, int threads, F&& f) {
  const int count = end - begin;
  if (count <= 0) return;
  if (threads > count) threads = count;
  if (threads <= 1) {
    for (int i = begin; i < end; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(count) * w / threads);
    const int hi = begin + static_cast<int>(static_cast<long long>(count) * (w + 1) / threads);
    pool.emplace_back([lo, hi, w, &errors, &f] {
      try {
        for (int i = lo; i < hi; ++i) f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Like parallel_for but hands each worker its whole chunk plus a worker id,
/// for code that keeps per-worker scratch state (e.g. a cloned factorization).
template <class F>
void parallel_chunks(int count, int threads, F&& f) {
  if (count <= 0) return;
  if (threads > count) threads = count;
  if (threads <= 1) {
    f(0, count, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(count) * w / threads);
    const int hi = static_cast<int>(static_cast<long long>(count) * (w + 1) / threads);
    pool.emplace_back([lo, hi, w, &errors, &f] {
      try {
        f(lo, hi, w);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace tpfem
