#pragma once
#include <cstdint>
#include <cmath>

namespace copsched {

// 64-bit finalizer (SplitMix64). Used both as the generator step and to hash
// (seed, work-item) tuples into substream states, so any work item's stream is
// a pure function of the seed and its indices — the property the parallel
// kernels rely on for bitwise-reproducible output under any thread count.
inline std::uint64_t hash64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Rng {
    std::uint64_t state = 0;

    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        return hash64(state);
    }
    // uniform on [0,1), 53 random bits
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // unit-rate exponential; log1p keeps small draws exact and avoids log(0)
    double exp1() { return -std::log1p(-u01()); }
};

// Stream for work item (i, j, k) of a computation seeded with `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t i,
                     std::uint64_t j = 0, std::uint64_t k = 0) {
    std::uint64_t s = hash64(seed + 0x9e3779b97f4a7c15ULL);
    s = hash64(s ^ (i + 0xd1b54a32d192ed03ULL));
    s = hash64(s ^ (j + 0x8cb92ba72f3d8dd7ULL));
    s = hash64(s ^ (k + 0xda942042e4dd58b5ULL));
    return Rng{s};
}

} // namespace copsched
