#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace tubespec {

// 0 means hardware concurrency.
void set_num_threads(int n);
int num_threads();

// fn(begin, end, worker) over contiguous chunks of [0, n).
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  const int nt = std::max(1, std::min(num_threads(), n / 256));
  if (nt == 1) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int w = 0; w < nt; ++w) {
    const int b = static_cast<int>(static_cast<long long>(n) * w / nt);
    const int e = static_cast<int>(static_cast<long long>(n) * (w + 1) / nt);
    pool.emplace_back([&fn, b, e, w] { fn(b, e, w); });
  }
  for (auto& t : pool) t.join();
}

inline int parallel_workers(int n) { return std::max(1, std::min(num_threads(), n / 256)); }

}  // namespace tubespec
