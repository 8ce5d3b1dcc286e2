#include "confsel/rng.hpp"

#include <cmath>

namespace confsel::rng {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
    std::uint64_t h = mix(seed + kGolden);
    h = mix(h ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
    h = mix(h ^ (index + 0x8CB92BA72F3D8DD7ULL));
    return h;
}

KeyedStream::KeyedStream(std::uint64_t seed, Stream stream, std::uint64_t index)
    : state_(derive_seed(seed, stream, index)) {}

std::uint64_t KeyedStream::next_u64() {
    state_ += kGolden;
    return mix(state_);
}

double KeyedStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double KeyedStream::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double KeyedStream::normal() {
    if (spare_normal_) {
        const double z = *spare_normal_;
        spare_normal_.reset();
        return z;
    }
    // Marsaglia polar method.
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * factor;
    return u * factor;
}

std::uint64_t KeyedStream::below(std::uint64_t bound) {
    // Lemire-style rejection on the high word.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = next_u64();
        const __uint128_t product = static_cast<__uint128_t>(x) * bound;
        if (static_cast<std::uint64_t>(product) >= threshold) {
            return static_cast<std::uint64_t>(product >> 64);
        }
    }
}

} // namespace confsel::rng
