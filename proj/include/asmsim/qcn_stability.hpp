#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace asmsim {

// Constants of the QCN fluid model's characteristic equation 1 + G(s) = 0,
//   G(s) = e^{tau s} a3 (s+b)(s+gamma) / (s (s^2 + beta s + alpha))
// evaluated in packet units (rates in packets/s).
struct QcnStabilityParams {
    double capacity = 0;    // C, packets/s
    double sources = 1;     // N
    double sample_p = 0.01; // p_s
    double gd = 1.0 / 128.0;
    double weight = 2.0;
    double r_ai = 0;        // packets/s

    double rc = 0;   // C/N
    double eta = 0;  // p_s / ((1-p_s)^-100 - 1)
    double zeta = 0; // eta (1-p_s)^500
    double a1 = 0, a2 = 0, a3 = 0, a4 = 0;
    double b = 0;     // p_s * rc
    double alpha = 0; // b (a1 - a2)
    double beta = 0;  // b + a1
    double gamma = 0; // N a4 / a3
};

inline QcnStabilityParams make_qcn_stability(double capacity_bps, double sources,
                                             double sample_p, double gd, double weight,
                                             double r_ai_bps, double packet_bytes = 1500) {
    if (sample_p <= 0 || sample_p >= 1)
        throw std::invalid_argument("make_qcn_stability: need 0 < p_s < 1");
    QcnStabilityParams q;
    const double bits = packet_bytes * 8.0;
    q.capacity = capacity_bps / bits;
    q.sources = sources;
    q.sample_p = sample_p;
    q.gd = gd;
    q.weight = weight;
    q.r_ai = r_ai_bps / bits;

    q.rc = q.capacity / q.sources;
    q.eta = sample_p / (std::pow(1.0 - sample_p, -100.0) - 1.0);
    q.zeta = q.eta * std::pow(1.0 - sample_p, 500.0);
    q.a1 = q.eta * q.rc / 2.0 + q.eta * q.zeta * q.r_ai / (2.0 * sample_p);
    q.a2 = q.eta * q.rc / 2.0;
    q.a3 = gd * weight * q.rc;
    q.a4 = sample_p * q.rc * gd;
    if (q.a3 <= 0) throw std::domain_error("make_qcn_stability: a3 must be positive");
    q.b = sample_p * q.rc;
    q.alpha = q.b * (q.a1 - q.a2);
    q.beta = q.b + q.a1;
    q.gamma = q.sources * q.a4 / q.a3;
    return q;
}

// The published omega* expression carries a4^3 under the inner radical, which
// is dimensionally inconsistent with the surrounding a3^2-terms; A3Fourth
// uses a3^4 instead and is the default. Both variants stay selectable.
enum class OmegaStarVariant : std::uint8_t { A3Fourth, A4Cubed };

inline double qcn_omega_star(const QcnStabilityParams& q, OmegaStarVariant v) {
    const double a3sq = q.a3 * q.a3;
    const double inner = (v == OmegaStarVariant::A3Fourth) ? a3sq * a3sq / 4.0
                                                           : std::pow(q.a4, 3.0) / 4.0;
    const double rad = inner + q.gamma * q.gamma * a3sq;
    if (rad < 0) throw std::domain_error("qcn_omega_star: negative radicand");
    return std::sqrt(a3sq / 2.0 + std::sqrt(rad));
}

inline double qcn_omega_bar(const QcnStabilityParams& q) {
    const double a3sq = q.a3 * q.a3;
    const double inner = a3sq + 2.0 * q.alpha - q.beta * q.beta;
    const double rad = inner * inner + 4.0 * (a3sq * q.gamma * q.gamma - q.alpha * q.alpha);
    if (rad < 0)
        throw std::domain_error("qcn_omega_bar: negative radicand, inner=" + std::to_string(inner));
    const double outer = (inner + std::sqrt(rad)) / 2.0;
    if (outer < 0) throw std::domain_error("qcn_omega_bar: negative square");
    return std::sqrt(outer);
}

// Smallest feedback delay that makes the QCN loop unstable:
//   tau_min = (1/wbar) [atan(w*/b) + atan(w*/gamma) - atan(wbar/beta - alpha/(beta wbar))]
inline double qcn_delay_lower_bound(const QcnStabilityParams& q,
                                    OmegaStarVariant v = OmegaStarVariant::A3Fourth) {
    const double ws = qcn_omega_star(q, v);
    const double wb = qcn_omega_bar(q);
    const double phase = std::atan(ws / q.b) + std::atan(ws / q.gamma) -
                         std::atan(wb / q.beta - q.alpha / (q.beta * wb));
    return phase / wb;
}

// |G(j w)| without the delay factor (|e^{j w tau}| = 1).
inline double qcn_loop_gain(const QcnStabilityParams& q, double omega) {
    const double w2 = omega * omega;
    const double num = q.a3 * std::sqrt((w2 + q.b * q.b) * (w2 + q.gamma * q.gamma));
    const double den = omega * std::sqrt((w2 - q.alpha) * (w2 - q.alpha) + w2 * q.beta * q.beta);
    return num / den;
}

// Flat key = value file holding the reference constants for the delay-bound
// analysis; every key is optional and falls back to the shipped defaults.
struct QcnReferenceParams {
    double sources = 1;
    double sample_p = 0.01;
    double gd = 1.0 / 128.0;
    double weight = 2.0;
    double r_ai_bps = 5e6;
    double packet_bytes = 1500;
};

inline QcnReferenceParams load_qcn_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file: " + path);
    QcnReferenceParams p;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw = raw.substr(0, hash);
        std::istringstream iss(raw);
        std::string key, eq, value;
        if (!(iss >> key)) continue;
        if (!(iss >> eq >> value) || eq != "=")
            throw std::runtime_error(path + ":" + std::to_string(line) + ": expected key = value");
        const double v = std::stod(value);
        if (key == "sources") p.sources = v;
        else if (key == "sampling_p") p.sample_p = v;
        else if (key == "gd") p.gd = v;
        else if (key == "weight") p.weight = v;
        else if (key == "r_ai_bps") p.r_ai_bps = v;
        else if (key == "packet_bytes") p.packet_bytes = v;
        else throw std::runtime_error(path + ":" + std::to_string(line) + ": unknown key " + key);
    }
    return p;
}

inline QcnStabilityParams make_qcn_stability(double capacity_bps, const QcnReferenceParams& p) {
    return make_qcn_stability(capacity_bps, p.sources, p.sample_p, p.gd, p.weight, p.r_ai_bps,
                              p.packet_bytes);
}

// 0-dB crossover located by bisection on a decade grid bracketing r(w) = 1.
inline double qcn_crossover_frequency(const QcnStabilityParams& q) {
    double lo = qcn_omega_bar(q) * 1e-3;
    double hi = qcn_omega_bar(q) * 1e3;
    if (qcn_loop_gain(q, lo) < 1.0)
        throw std::domain_error("qcn_crossover_frequency: no low-frequency gain excess");
    while (qcn_loop_gain(q, hi) > 1.0) hi *= 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (qcn_loop_gain(q, mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace asmsim
