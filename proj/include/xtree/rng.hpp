#pragma once

#include <cstdint>
#include <random>

namespace xtree {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Named randomness sub-streams. Every consumer derives its engine from the
// run seed, a stream tag and an optional per-item counter, so runs are
// reproducible and generation can be sharded without coupling the streams.
enum class Stream : std::uint64_t {
    Tree = 1,
    Init = 2,
    Shuffle = 3,
    Reduction = 4,
    Weights = 5,
    Points = 6,
    Labels = 7,
    Noise = 8,
    Mixing = 9,
    Test = 100,
};

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
    std::uint64_t s = splitmix64(seed ^ 0x7f4a7c15a76bcf01ULL);
    s = splitmix64(s ^ static_cast<std::uint64_t>(stream));
    s = splitmix64(s ^ index);
    return std::mt19937_64(s);
}

}  // namespace xtree
