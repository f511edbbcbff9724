// Copyright 2026 The paircorr-lab Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "paircorr/numeric.hpp"

namespace paircorr::parallel {

/// Worker count: PAIRCORR_THREADS if set and positive, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("PAIRCORR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool in_worker = false;
}

/// Runs fn(chunk) for chunk in [0, chunks) and returns the results in chunk order.
/// The chunking is fixed by the caller, so results do not depend on the thread count.
/// Nested calls from inside a worker run serially.
template <typename T, typename Fn>
std::vector<T> map_chunks(std::size_t chunks, Fn&& fn) {
  std::vector<T> out(chunks);
  const unsigned workers =
      detail::in_worker ? 1u : static_cast<unsigned>(std::min<std::size_t>(worker_count(), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) out[c] = fn(c);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        detail::in_worker = true;
        for (std::size_t c = next++; c < chunks; c = next++) {
          try {
            out[c] = fn(c);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Sum of term(i) for i in [begin, end): compensated within fixed-size chunks,
/// pairwise across chunks. Bit-stable for any worker count.
template <typename T, typename Fn>
T sum(std::int64_t begin, std::int64_t end, Fn&& term, std::int64_t chunk = 1024) {
  if (end <= begin) return T{};
  const auto count = static_cast<std::size_t>(end - begin);
  const auto chunks = (count + static_cast<std::size_t>(chunk) - 1) / static_cast<std::size_t>(chunk);
  auto parts = map_chunks<T>(chunks, [&](std::size_t c) {
    const std::int64_t lo = begin + static_cast<std::int64_t>(c) * chunk;
    const std::int64_t hi = std::min(end, lo + chunk);
    CompensatedSum<T> acc;
    for (std::int64_t i = lo; i < hi; ++i) acc.add(term(i));
    return acc.value();
  });
  return pairwise_sum<T>(std::span<const T>(parts));
}

}  // namespace paircorr::parallel
