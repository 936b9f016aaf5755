#pragma once

#include <cstdint>

namespace asmsim {

// SplitMix64 stream. Chosen because it is trivially portable: the draw
// sequence for a given seed is a pure function of uint64 arithmetic, so it is
// bit-identical on every platform and compiler.
//
// Streams for individual entities (one per sampling switch port, one per
// randomized flow) are derived from the master scenario seed as
//   stream_seed = mix(master ^ (golden * (entity_id + 1)))
// so adding or removing one entity never perturbs another entity's draws.
class RngStream {
  public:
    RngStream() : state_(0) {}
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    static RngStream derive(std::uint64_t master_seed, std::uint64_t entity_id) {
        constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
        return RngStream(mix(master_seed ^ (kGolden * (entity_id + 1))));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // Uniform in [0,1) with 53 bits of mantissa; division by 2^53 is exact.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Uniform integer in [lo, hi], bias-free via 128-bit multiply.
    std::int64_t uniform_i64(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const auto wide = static_cast<unsigned __int128>(next_u64()) * span;
        return lo + static_cast<std::int64_t>(wide >> 64);
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace asmsim
