#pragma once
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace levym {

// Thread count resolution: explicit override > LEVY_MALLIAVIN_THREADS > hardware.
int resolve_threads(int override_threads = 0);
void set_thread_override(int n);  // process-wide, used by the CLI --threads flag

// Runs fn(i0, i1) over fixed-size blocks of [0, n).  The block layout depends
// only on n and block_size, never on the thread count, so per-block outputs
// are reproducible under any schedule.
void parallel_blocks(std::int64_t n, std::int64_t block_size,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn);

inline constexpr std::int64_t kDefaultBlock = 1024;

// Map-reduce over paths: fn fills a per-block partial; partials are folded
// sequentially in block order, so the result is bitwise thread-independent.
template <typename Partial, typename MapFn, typename FoldFn>
Partial block_map_reduce(std::int64_t n, std::int64_t block_size, Partial init, const MapFn& map_fn,
                         const FoldFn& fold_fn) {
    const std::int64_t nblocks = (n + block_size - 1) / block_size;
    std::vector<Partial> partials(static_cast<std::size_t>(nblocks), init);
    parallel_blocks(n, block_size, [&](std::int64_t i0, std::int64_t i1, std::int64_t b) {
        map_fn(i0, i1, partials[static_cast<std::size_t>(b)]);
    });
    Partial acc = init;
    for (const Partial& p : partials) fold_fn(acc, p);
    return acc;
}

}  // namespace levym
