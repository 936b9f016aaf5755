#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "asmsim/feedback.hpp"

namespace asmsim {

enum class AsmRegime : std::uint8_t { Approach, Sliding };

struct AsmCoeffs {
    double a_plus = 0;  // bits/s per quantizer unit
    double a_minus = 0;
    double b_plus = 0;
    double b_minus = 0;
};

struct AsmParams {
    AsmCoeffs approach;
    AsmCoeffs sliding;
    double bound_fb = 64;    // |F_b| below this enters the sliding regime
    double bound_state = 16; // |Q_f|+|dQ| below this re-arms approach gains
    double weight = 32;
    double sample_p = 0.01;
    double quant_scale = 1; // packets per quantizer unit, mirrors the CP
};

struct AsmRpState {
    double rate_bps = 0;
    std::optional<CpId> stored_cpid;
    AsmRegime regime = AsmRegime::Approach;
    double nic_capacity_bps = 0;
    double r_min_bps = 1e6;
};

// Per-unit gain such that a full-scale quantized input moves the rate by
// exactly `fraction` of the link capacity.
inline double coefficient_from_cap(double fraction, double capacity_bps, int max_code) {
    if (fraction <= 0) throw std::invalid_argument("coefficient_from_cap: fraction must be positive");
    if (max_code <= 0) throw std::invalid_argument("coefficient_from_cap: max_code must be positive");
    return fraction * capacity_bps / static_cast<double>(max_code);
}

// caps order: a+A a-A b+A b-A a+S a-S b+S b-S
inline void coefficients_from_caps(AsmParams& params, const std::array<double, 8>& caps,
                                   double capacity_bps, int max_code = 127) {
    params.approach.a_plus = coefficient_from_cap(caps[0], capacity_bps, max_code);
    params.approach.a_minus = coefficient_from_cap(caps[1], capacity_bps, max_code);
    params.approach.b_plus = coefficient_from_cap(caps[2], capacity_bps, max_code);
    params.approach.b_minus = coefficient_from_cap(caps[3], capacity_bps, max_code);
    params.sliding.a_plus = coefficient_from_cap(caps[4], capacity_bps, max_code);
    params.sliding.a_minus = coefficient_from_cap(caps[5], capacity_bps, max_code);
    params.sliding.b_plus = coefficient_from_cap(caps[6], capacity_bps, max_code);
    params.sliding.b_minus = coefficient_from_cap(caps[7], capacity_bps, max_code);
}

// Regime schedule: proximity to the stable point wins (it re-arms the large
// approach gains), then closeness to the boundary line selects sliding gains,
// otherwise the current regime persists.
inline AsmRegime select_regime(double fb, double qf, double dq, const AsmParams& p,
                               AsmRegime current) {
    if (std::abs(qf) + std::abs(dq) < p.bound_state) return AsmRegime::Approach;
    if (std::abs(fb) < p.bound_fb) return AsmRegime::Sliding;
    return current;
}

// Sign-switched gains; the qf*fb == 0 boundary takes the plus pair.
inline std::pair<double, double> select_coefficients(double qf, double fb, AsmRegime regime,
                                                     const AsmParams& p) {
    const AsmCoeffs& c = (regime == AsmRegime::Approach) ? p.approach : p.sliding;
    if (qf * fb < 0) return {c.a_minus, c.b_minus};
    return {c.a_plus, c.b_plus};
}

// Rate update r <- r - alpha*Qf - beta*dQ with CPID gating: decreases apply
// unconditionally and record the congestion point; increases apply only when
// the frame comes from the recorded congestion point (or none is recorded).
inline double asm_on_feedback(const FeedbackFrame& frame, AsmRpState& st, const AsmParams& p) {
    if (frame.type != FeedbackType::Asm) return st.rate_bps; // malformed for this RP
    const double qf = dequantize(frame.qf_q, p.quant_scale);
    const double dq = dequantize(frame.dq_q, p.quant_scale);
    const double fb = compute_fb(qf, dq, p.weight);

    st.regime = select_regime(fb, qf, dq, p, st.regime);
    const auto [alpha, beta] = select_coefficients(qf, fb, st.regime, p);
    const double delta = -alpha * qf - beta * dq;

    if (delta < 0) {
        st.stored_cpid = frame.cpid;
    } else if (delta > 0) {
        if (st.stored_cpid.has_value() && *st.stored_cpid != frame.cpid)
            return st.rate_bps;
    } else {
        return st.rate_bps;
    }
    st.rate_bps = std::clamp(st.rate_bps + delta, st.r_min_bps, st.nic_capacity_bps);
    return st.rate_bps;
}

} // namespace asmsim
