#ifndef SUBGROUP_RANDOM_HPP
#define SUBGROUP_RANDOM_HPP

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <vector>

namespace subgroup {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}

/**
 * Derive an independent stream seed from a base seed and a tuple of stream indices,
 * e.g. `derive_seed(seed, {k, sample})`. Distinct index tuples give unrelated streams.
 */
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices) {
    std::uint64_t h = detail::splitmix64(base);
    for (auto i : indices) {
        h = detail::splitmix64(h ^ detail::splitmix64(i + 0x632be59bd9b4e019ULL));
    }
    return h;
}

/// Draw `m` distinct indices from [0, n) uniformly; returned in draw order.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < m && i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(std::min(m, n));
    return pool;
}

}

#endif
