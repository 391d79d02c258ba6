#pragma once

#include <cstdint>
#include <random>

namespace sigabc {

using Rng = std::mt19937_64;

/// SplitMix64 finaliser; used to derive well-separated seeds from counters.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Purposes keep streams drawn for different jobs under the same master seed disjoint.
enum class StreamPurpose : std::uint64_t {
    Particle = 1,
    Training = 2,
    Pilot = 3,
    Observation = 4,
    Reference = 5,
    Folds = 6,
    Estimator = 7,
    Lambda = 8,
};

/// Seed of stream `index` under `master` for `purpose`.  Pure function of its
/// arguments, so any thread can rebuild the stream of any particle.
constexpr std::uint64_t stream_seed(std::uint64_t master, StreamPurpose purpose,
                                    std::uint64_t index) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    return splitmix64(h ^ index);
}

inline Rng make_stream(std::uint64_t master, StreamPurpose purpose, std::uint64_t index) {
    return Rng(stream_seed(master, purpose, index));
}

}  // namespace sigabc
