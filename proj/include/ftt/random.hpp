#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string_view>

namespace ftt {

/// splitmix64 finalizer. Used both as a hash mixer and to derive child seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent child seed from a parent seed and a stage tag.
/// Stage tags are short ASCII names ("balance", "train", ...) so the split
/// scheme is readable in configs and logs.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stage) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

// Seeded generator with platform-independent draws. std::mt19937_64 output is
// fixed by the standard; the standard distributions are not, so the draws are
// implemented here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_below(std::uint64_t n);

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller (one value per call, no caching).
    double normal();

    /// Poisson draw; exact for any mean (sums chunks of mean <= 30).
    std::uint64_t poisson(double mean);

    template <typename It>
    void shuffle(It first, It last) {
        auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            auto j = uniform_below(i);
            std::iter_swap(first + (i - 1), first + j);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace ftt
