#pragma once

#include <cstdint>
#include <limits>

namespace noma_ris {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Identifies which random quantity a stream feeds. Streams for different
/// links never overlap, so adding a link never perturbs existing draws.
enum class StreamId : std::uint64_t {
    SatUser = 1,
    SatRis = 2,
    BsUser = 3,
    BsRis = 4,
    RisUser = 5,
    RisPhase = 6,
    Environment = 7,
    Generic = 100,
};

/// Counter-based generator: the i-th output is a pure function of (key, i),
/// so a stream keyed by (seed, trial, link) yields the same numbers no matter
/// which worker draws it or in which order trials are scheduled.
/// Satisfies UniformRandomBitGenerator for use with <random> distributions.
class CounterStream {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterStream(std::uint64_t key) noexcept : key_(mix64(key)) {}

    CounterStream(std::uint64_t seed, std::uint64_t trial, StreamId link) noexcept
        : key_(mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + mix64(trial + 0x3c6ef372fe94f82bULL) +
                     static_cast<std::uint64_t>(link) * 0x9e3779b97f4a7c15ULL)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        return mix64(key_ + (counter_++ + 1) * 0x9e3779b97f4a7c15ULL);
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace noma_ris
