#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace genint {

inline unsigned worker_count() {
    if (const char* env = std::getenv("GENINT_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Splits [0, n) into contiguous chunks, one per worker. Each chunk is
// processed by fn(lo, hi). Every output element must depend only on its own
// indices, so results are identical to a sequential run for any worker count.
template <typename Fn>
void parallel_chunks(int64_t n, Fn&& fn, int64_t grain = 256) {
    if (n <= 0) return;
    unsigned workers = worker_count();
    int64_t max_chunks = std::max<int64_t>(1, n / std::max<int64_t>(1, grain));
    int64_t chunks = std::min<int64_t>(workers, max_chunks);
    if (chunks <= 1) {
        fn(int64_t{0}, n);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(chunks - 1));
    int64_t base = n / chunks, rem = n % chunks, lo = 0;
    for (int64_t c = 0; c < chunks; ++c) {
        int64_t hi = lo + base + (c < rem ? 1 : 0);
        if (c + 1 == chunks) {
            fn(lo, hi);
        } else {
            threads.emplace_back([&fn, lo, hi] { fn(lo, hi); });
        }
        lo = hi;
    }
    for (auto& t : threads) t.join();
}

}  // namespace genint
