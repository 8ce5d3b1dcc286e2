#pragma once

#include <cstdint>
#include <optional>

namespace confsel::rng {

/// Independent purposes a seed is split into. Values are part of the
/// reproducibility contract; do not renumber.
enum class Stream : std::uint64_t {
    tie_break = 1,
    prune_hete = 2,
    prune_homo = 3,
    trial_data = 4,
    study = 5,
    prds = 6,
    weight_noise = 7,
    selection = 8,
    superuniformity = 9,
};

/// SplitMix64 stream keyed by (seed, stream, index).
///
/// Draws for unit j come from the stream keyed by j, so results never depend
/// on iteration order or thread schedule. Uniform and normal variates are
/// produced by this class rather than <random> distributions, whose output is
/// implementation-defined.
class KeyedStream {
public:
    KeyedStream(std::uint64_t seed, Stream stream, std::uint64_t index);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    double normal();
    /// Uniform integer in [0, bound) without modulo bias. bound > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t state_;
    std::optional<double> spare_normal_;
};

inline double keyed_uniform(std::uint64_t seed, Stream stream, std::uint64_t index) {
    return KeyedStream(seed, stream, index).uniform();
}

/// Derives a child seed, e.g. a per-trial selection seed from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index);

} // namespace confsel::rng
