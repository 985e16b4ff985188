#include "levym/parallel.hpp"

#include <cstdlib>

namespace levym {

namespace {
std::atomic<int> g_thread_override{0};
}

void set_thread_override(int n) { g_thread_override.store(n); }

int resolve_threads(int override_threads) {
    if (override_threads > 0) return override_threads;
    if (int g = g_thread_override.load(); g > 0) return g;
    if (const char* env = std::getenv("LEVY_MALLIAVIN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_blocks(std::int64_t n, std::int64_t block_size,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    const std::int64_t nblocks = (n + block_size - 1) / block_size;
    const int nthreads = std::min<std::int64_t>(resolve_threads(), nblocks);
    if (nthreads <= 1) {
        for (std::int64_t b = 0; b < nblocks; ++b)
            fn(b * block_size, std::min(n, (b + 1) * block_size), b);
        return;
    }
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            fn(b * block_size, std::min(n, (b + 1) * block_size), b);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads - 1));
    for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

}  // namespace levym
