#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace vthing {

/// Seeded pseudo-random stream backed by std::mt19937_64. The same seed
/// replays the same sequence on the same build. Not thread-safe; give each
/// owner its own instance.
class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    static RandomSource from_entropy()
    {
        std::random_device rd;
        std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        return RandomSource(seed);
    }

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }

    /// Uniform real in [lo, hi].
    double uniform_real(double lo, double hi)
    {
        if (lo == hi)
            return lo;
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
        // Interpolate instead of lo + u*(hi-lo) so that very wide ranges do not overflow.
        double x = lo * (1.0 - u) + hi * u;
        return x < lo ? lo : (x > hi ? hi : x);
    }

    bool coin() { return (engine_() >> 63) != 0; }

    /// Uniform index in [0, n); n must be > 0.
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1)); }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view text) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace vthing
