#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace lagflow {

// process-wide worker count used by particle loops; results are merged in
// fixed chunk order so a given thread count is bit-reproducible (changing the
// count may perturb last-ulp sums)
void set_threads(int n);
int get_threads();

// split [0, n) into one contiguous chunk per worker and run fn(chunk, begin, end)
inline void parallel_chunks(std::size_t n, const std::function<void(int, std::size_t, std::size_t)>& fn) {
    const int workers = get_threads();
    if (workers <= 1 || n < 2048) {
        fn(0, 0, n);
        return;
    }
    const std::size_t per = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        const std::size_t b = std::min(n, static_cast<std::size_t>(w) * per);
        const std::size_t e = std::min(n, b + per);
        if (b >= e) break;
        pool.emplace_back(fn, w, b, e);
    }
    for (auto& t : pool) t.join();
}

}  // namespace lagflow
