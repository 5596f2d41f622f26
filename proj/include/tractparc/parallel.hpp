#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace tractparc {

inline int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Evenly sized contiguous [begin, end) ranges. The chunk structure is a
// function of (n, n_chunks) only, never of the worker count, so reductions
// that sum chunk partials in chunk order give bit-identical results for any
// --jobs value.
inline std::vector<std::pair<std::int64_t, std::int64_t>> fixed_chunks(std::int64_t n,
                                                                       int n_chunks) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  if (n <= 0 || n_chunks <= 0) return out;
  const std::int64_t k = std::min<std::int64_t>(n, n_chunks);
  for (std::int64_t c = 0; c < k; ++c) {
    const std::int64_t b = n * c / k;
    const std::int64_t e = n * (c + 1) / k;
    if (b < e) out.emplace_back(b, e);
  }
  return out;
}

// Runs f(chunk_index) for every chunk index in [0, n_chunks). Each chunk is
// executed wholly by one worker; which worker does not matter because chunks
// never share mutable state.
template <typename F>
void parallel_chunks(int n_chunks, int jobs, F&& f) {
  jobs = resolve_jobs(jobs);
  if (n_chunks <= 0) return;
  if (jobs <= 1 || n_chunks == 1) {
    for (int c = 0; c < n_chunks; ++c) f(c);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      try {
        f(c);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::min(jobs, n_chunks);
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Parallel loop over [0, n) items with disjoint outputs. Work is split into
// per-item chunks; results must not depend on execution order.
template <typename F>
void parallel_for(std::int64_t n, int jobs, F&& f) {
  const auto chunks = fixed_chunks(n, std::max(1, resolve_jobs(jobs) * 4));
  parallel_chunks(static_cast<int>(chunks.size()), jobs, [&](int c) {
    for (std::int64_t i = chunks[c].first; i < chunks[c].second; ++i) f(i);
  });
}

}  // namespace tractparc
