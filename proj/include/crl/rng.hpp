#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace crl {

/// SplitMix64 finalizer. Used to derive independent engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions below are implemented here rather than taken
/// from <random>, because the standard library distributions are allowed to
/// differ between implementations.
///
/// Stream splitting: stream `k` of seed `s` is an engine seeded with
/// splitmix64(splitmix64(s) ^ splitmix64(k + 1)). Trajectory `i` of a
/// sampled dataset uses stream `i`; the Q-table initialisation of a training
/// run uses the stream constants in `streams`.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        return Rng(splitmix64(seed) ^ splitmix64(stream_id + 1), RawSeed{});
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    int uniform_int(int n);

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal();

    /// Index drawn from the (not necessarily normalised) non-negative weights.
    int categorical(std::span<const double> weights);

private:
    struct RawSeed {};
    Rng(std::uint64_t raw, RawSeed) : engine_(raw) {}

    std::mt19937_64 engine_;
};

namespace streams {
inline constexpr std::uint64_t kCriticInit = 0xC001;
inline constexpr std::uint64_t kRandomMdp = 0xC002;
}  // namespace streams

}  // namespace crl
