#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "asmsim/fluid.hpp"

namespace asmsim {

// Delay-perturbation bounds for the switched fluid model. The delayed system
// is equivalent to the undelayed one with drifted gains, a drifted boundary
// line and a bounded additive disturbance E1 on the rate derivative; these
// are the closed-form envelopes of that decomposition.
struct DelayRobustnessParams {
    double k = 0;       // 1/(pC)
    double a_bar = 0;   // N (a+ + a-) / 2
    double k_a = 0;     // N (a+ - a-) / 2
    double b_bar = 0;   // N (b+ + b-) / 2
    double k_b = 0;     // N (b+ - b-) / 2
    double gamma_m = 0; // sqrt(a_bar^2 + b_bar^2)
    double k_gamma = 0; // sqrt(k_a^2 + k_b^2)
    double nu1 = 0;     // tau e^{(1 + gamma_m + k_gamma) tau}
    double nu2 = 0;     // tau (gamma_m + k_gamma) e^{(1 + gamma_m + k_gamma) tau}
    double l_state = 0; // |x1| + |x2|
    double eps1_bound = 0;        // nu1 * L
    double eps2_bound = 0;        // nu2 * L
    double drift_amplitude = 0;   // K_A nu1 + K K_B nu2
    double e1_bound = 0;          // (A nu1 + K B nu2) L
};

inline DelayRobustnessParams delay_robustness_bounds(const FluidSystem& s, double tau) {
    if (tau < 0) throw std::invalid_argument("delay_robustness_bounds: tau must be >= 0");
    DelayRobustnessParams d;
    d.k = 1.0 / (s.sample_p * s.capacity);
    d.a_bar = s.sources * (s.a_plus + s.a_minus) / 2.0;
    d.k_a = s.sources * (s.a_plus - s.a_minus) / 2.0;
    d.b_bar = s.sources * (s.b_plus + s.b_minus) / 2.0;
    d.k_b = s.sources * (s.b_plus - s.b_minus) / 2.0;
    d.gamma_m = std::hypot(d.a_bar, d.b_bar);
    d.k_gamma = std::hypot(d.k_a, d.k_b);
    const double growth = std::exp((1.0 + d.gamma_m + d.k_gamma) * tau);
    d.nu1 = tau * growth;
    d.nu2 = tau * (d.gamma_m + d.k_gamma) * growth;
    d.l_state = std::abs(s.x1) + std::abs(s.x2);
    d.eps1_bound = d.nu1 * d.l_state;
    d.eps2_bound = d.nu2 * d.l_state;
    d.drift_amplitude = d.k_a * d.nu1 + d.k * d.k_b * d.nu2;
    d.e1_bound = (d.a_bar * d.nu1 + d.k * d.b_bar * d.nu2) * d.l_state;
    return d;
}

// Width of the region around the target inside which a disturbance of
// magnitude |E1| can defeat the sliding motion:
//   D = max over branches of w^2 |E1| / |w^2 N a -/+ w N b + p^2 C^2|.
inline double h0_width(const FluidSystem& s, double e1) {
    const double w2n = s.weight * s.weight * s.sources;
    const double wn = s.weight * s.sources;
    const double pc2 = s.sample_p * s.sample_p * s.capacity * s.capacity;
    const double den_minus = std::abs(w2n * s.a_minus - wn * s.b_minus + pc2);
    const double den_plus = std::abs(w2n * s.a_plus - wn * s.b_plus + pc2);
    if (den_minus == 0.0 || den_plus == 0.0)
        throw std::domain_error("h0_width: degenerate parameterization, zero denominator");
    const double num = s.weight * s.weight * std::abs(e1);
    return std::max(num / den_minus, num / den_plus);
}

inline double sign_of(double v) { return (v > 0) - (v < 0); }

struct FluidRhs {
    double dx1 = 0;
    double dx2 = 0;
};

// Right-hand side of the delayed switched model written on the perturbed
// observations (x + eps) and the drifted boundary sign.
inline FluidRhs prop_rhs_delayed(const DelayRobustnessParams& d, double x1, double x2,
                                 double eps1, double eps2, double fb_bar_sign) {
    FluidRhs r;
    r.dx1 = x2;
    r.dx2 = -d.a_bar * (x1 + eps1) - d.k * d.b_bar * (x2 + eps2) -
            (d.k_a * std::abs(x1 + eps1) + d.k * d.k_b * std::abs(x2 + eps2)) * fb_bar_sign;
    return r;
}

// The same right-hand side rearranged as drifted gains plus the disturbance
// E1 = A eps1 + K B eps2; algebraically identical to prop_rhs_delayed.
inline FluidRhs prop_rhs_drifted(const DelayRobustnessParams& d, double x1, double x2,
                                 double eps1, double eps2, double fb_bar_sign) {
    const double l = std::abs(x1) + std::abs(x2);
    const double phi = (d.k_a * (std::abs(x1 + eps1) - std::abs(x1)) +
                        d.k * d.k_b * (std::abs(x2 + eps2) - std::abs(x2))) *
                       fb_bar_sign;
    const double a_drift = d.a_bar + (l > 0 ? phi / l * sign_of(x1) : 0.0);
    const double b_drift = d.k * d.b_bar + (l > 0 ? phi / l * sign_of(x2) : 0.0);
    const double e1 = d.a_bar * eps1 + d.k * d.b_bar * eps2;
    FluidRhs r;
    r.dx1 = x2;
    r.dx2 = -a_drift * x1 - b_drift * x2 - e1 -
            (d.k_a * std::abs(x1) + d.k * d.k_b * std::abs(x2)) * fb_bar_sign;
    // The drift rewrite divides by L; at the origin fall back to the raw form.
    if (l == 0.0) r.dx2 = -e1 - phi;
    return r;
}

} // namespace asmsim
