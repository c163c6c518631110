#pragma once

#include <cstdint>
#include <random>

namespace squarepack {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// mt19937_64 keyed by (seed, stream). Uniforms are built from raw output bits so the
// stream of draws does not depend on the standard library's distribution classes.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0)
        : engine_(splitmix64(seed ^ splitmix64(stream * 0xd1b54a32d192ed03ULL + 1))) {}

    uint64_t next() { return engine_(); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    // Integer in [0, n).
    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>((static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace squarepack
