#include "wcascade/rng.hpp"

#include <cmath>
#include <numbers>

namespace wcascade {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_key(int layer, std::uint64_t index, int side, int channel) {
    // layer < 2^8, index < 2^48, side and channel < 2^4 each
    return (static_cast<std::uint64_t>(layer & 0xFF) << 56) |
           (static_cast<std::uint64_t>(channel & 0xF) << 52) |
           (static_cast<std::uint64_t>(side & 0xF) << 48) | (index & 0xFFFFFFFFFFFFULL);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ stream)) {}

std::uint64_t CounterRng::next_u64() {
    return splitmix64(key_ + 0xD1B54A32D192ED03ULL * ++counter_);
}

double CounterRng::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterRng::sign() { return (next_u64() >> 63) ? -1.0 : 1.0; }

}  // namespace wcascade
