#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace asmsim {

using NodeId = std::uint32_t;
using CpId = std::uint32_t;

struct Packet {
    NodeId source = 0;
    NodeId dest = 0;
    std::uint32_t flow = 0;
    std::uint32_t size_bytes = 0;
    std::uint64_t seq = 0;
};

// Congestion measure F_b = -(q - q0) - w * dq. Negative means congested.
inline double compute_fb(double qf, double dq, double w) {
    return -qf - w * dq;
}

// Saturating round-to-nearest into a signed 8-bit code.
// dequantize(code) = code * scale; round-trip error <= scale/2 in range.
inline std::int8_t quantize(double value, double scale) {
    if (scale <= 0) throw std::invalid_argument("quantize: scale must be positive");
    double units = std::round(value / scale);
    if (units > 127.0) units = 127.0;
    if (units < -128.0) units = -128.0;
    return static_cast<std::int8_t>(units);
}

inline double dequantize(std::int8_t code, double scale) {
    return static_cast<double>(code) * scale;
}

enum class FeedbackType : std::uint8_t { Asm = 0, Qcn = 1 };

// Feedback frame. ASM carries Q_f and dQ in separate signed 8-bit fields and
// is emitted for either sign of F_b; QCN carries only the 6-bit magnitude of
// a negative F_b and is never generated when F_b >= 0.
struct FeedbackFrame {
    CpId cpid = 0;
    NodeId dst = 0;
    FeedbackType type = FeedbackType::Asm;
    std::int8_t qf_q = 0;  // ASM
    std::int8_t dq_q = 0;  // ASM
    std::uint8_t fb_q = 0; // QCN, 6-bit magnitude of negative F_b

    friend bool operator==(const FeedbackFrame&, const FeedbackFrame&) = default;
};

// Wire layout, big-endian: cpid(4) dst(4) type(1) payload(2).
// ASM payload: qf(int8) dq(int8). QCN payload: fb6(uint8) 0x00.
using FrameBytes = std::array<std::uint8_t, 11>;

inline FrameBytes encode_frame(const FeedbackFrame& f) {
    FrameBytes b{};
    auto put32 = [&](int off, std::uint32_t v) {
        b[off + 0] = static_cast<std::uint8_t>(v >> 24);
        b[off + 1] = static_cast<std::uint8_t>(v >> 16);
        b[off + 2] = static_cast<std::uint8_t>(v >> 8);
        b[off + 3] = static_cast<std::uint8_t>(v);
    };
    put32(0, f.cpid);
    put32(4, f.dst);
    b[8] = static_cast<std::uint8_t>(f.type);
    if (f.type == FeedbackType::Asm) {
        b[9] = static_cast<std::uint8_t>(f.qf_q);
        b[10] = static_cast<std::uint8_t>(f.dq_q);
    } else {
        b[9] = f.fb_q & 0x3F;
        b[10] = 0;
    }
    return b;
}

inline FeedbackFrame decode_frame(const FrameBytes& b) {
    auto get32 = [&](int off) {
        return (static_cast<std::uint32_t>(b[off]) << 24) |
               (static_cast<std::uint32_t>(b[off + 1]) << 16) |
               (static_cast<std::uint32_t>(b[off + 2]) << 8) |
               static_cast<std::uint32_t>(b[off + 3]);
    };
    FeedbackFrame f;
    f.cpid = get32(0);
    f.dst = get32(4);
    if (b[8] > 1) throw std::invalid_argument("decode_frame: unknown frame type");
    f.type = static_cast<FeedbackType>(b[8]);
    if (f.type == FeedbackType::Asm) {
        f.qf_q = static_cast<std::int8_t>(b[9]);
        f.dq_q = static_cast<std::int8_t>(b[10]);
    } else {
        f.fb_q = b[9] & 0x3F;
    }
    return f;
}

} // namespace asmsim
