#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace rle {

/// Pairwise (cascade) summation: order-insensitive to thread scheduling
/// because callers store per-item values first and reduce once.
inline double pairwise_sum(const double* data, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error (sample std / sqrt(n)).
inline MeanStderr mean_stderr(const std::vector<double>& v) {
  MeanStderr out;
  const std::size_t n = v.size();
  if (n == 0) return out;
  out.mean = pairwise_sum(v) / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> dev2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - out.mean;
    dev2[i] = d * d;
  }
  const double var = pairwise_sum(dev2) / static_cast<double>(n - 1);
  out.std_error = std::sqrt(var / static_cast<double>(n));
  return out;
}

/// Runs fn(i) for i in [0, n) on up to jobs threads. fn must only touch its
/// own slot; results are deterministic because reduction happens afterwards.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (jobs <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min(jobs, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next{0};
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace rle
