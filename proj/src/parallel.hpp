#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace frictionlab::detail {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FRICTIONLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Static chunking over [0, n); work(i) must be independent per index so the
/// result does not depend on the worker count.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& work) {
    const int nt = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)),
                                         std::max<std::size_t>(n, 1));
    if (nt <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    const std::size_t chunk = (n + static_cast<std::size_t>(nt) - 1) / static_cast<std::size_t>(nt);
    for (int t = 0; t < nt; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &work] {
            for (std::size_t i = lo; i < hi; ++i) work(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// SplitMix64; used to derive independent per-path seeds from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index + 0x51ed2701ULL));
}

}  // namespace frictionlab::detail
