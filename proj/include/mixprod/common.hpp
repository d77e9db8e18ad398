#ifndef MIXPROD_COMMON_HPP
#define MIXPROD_COMMON_HPP

#include <Eigen/Dense>

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mixprod {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SampleMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Subsets of observables are bitmasks: bit i set <=> observable i in the set.
// All 2^n-length moment/extension arrays are indexed in ascending bitmask order.
using Mask = std::uint32_t;

inline int popcount(Mask m) { return std::popcount(m); }

// Maps a bitmask over positions within the sorted index list `ids` to the
// corresponding bitmask over global observable indices.
inline Mask expand_mask(Mask local, const std::vector<int>& ids) {
    Mask global = 0;
    for (std::size_t t = 0; t < ids.size(); ++t)
        if (local & (Mask{1} << t)) global |= Mask{1} << ids[t];
    return global;
}

// Worker count for parallel sections: MIXPROD_THREADS caps it, 0 or unset
// means hardware concurrency.
inline unsigned thread_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("MIXPROD_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<unsigned>(v);
    }
    return hw;
}

// Runs f(begin, end) over disjoint chunks of [0, n). Chunks are contiguous and
// assigned statically, so writers to per-index slots stay deterministic
// regardless of the worker count.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    unsigned workers = thread_count();
    if (workers <= 1 || n < 2) {
        f(std::size_t{0}, n);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace mixprod

#endif
