#pragma once

#include <cmath>
#include <cstdint>

namespace asmsim {

// Simulated time is integer nanoseconds. At 100 Gbps a 1500 B frame lasts
// 120 ns; floating-point seconds would accumulate rounding and break the
// bit-identical-rerun contract.
using TimeNs = std::int64_t;

constexpr TimeNs kNsPerSec = 1'000'000'000;
constexpr TimeNs kTimeNever = INT64_MAX;

inline double to_seconds(TimeNs t) { return static_cast<double>(t) / 1e9; }

inline TimeNs seconds_to_ns(double s) {
    return static_cast<TimeNs>(std::llround(s * 1e9));
}

// Wire time of `bits` at `bps`, rounded to the nearest nanosecond.
inline TimeNs tx_time_ns(std::int64_t bits, double bps) {
    return static_cast<TimeNs>(std::llround(static_cast<double>(bits) * 1e9 / bps));
}

} // namespace asmsim
