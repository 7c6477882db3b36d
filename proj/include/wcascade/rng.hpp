#pragma once

#include <cstdint>

namespace wcascade {

// Counter-based generator: every draw is a pure function of (seed, stream key,
// counter), so independent streams never perturb each other and results do not
// depend on draw order or thread count. Sampling routines are written out here
// instead of using <random> distributions, whose output is implementation-defined.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    double normal();
    // +1 or -1 with equal probability.
    double sign();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Packs a tree node and channel into a stream key.
std::uint64_t stream_key(int layer, std::uint64_t index, int side, int channel);

}  // namespace wcascade
