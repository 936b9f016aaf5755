#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace asmsim {

// One periodic snapshot. Queue lengths are recorded for every congestion
// point; the aggregate rate, tx and drop counters refer to the monitored
// port. slope_k is the Q/R-plane tangent between consecutive rows, blank
// when the queue did not move.
struct TraceRow {
    double t = 0;                       // seconds
    std::vector<double> port_q;         // packets, one per port
    double agg_rate = 0;                // bits/s through the monitored port
    std::vector<double> flow_rate;      // bits/s, one per flow (0 if inactive)
    std::uint64_t tx_bytes = 0;         // cumulative, monitored port
    std::uint64_t drops = 0;            // cumulative, monitored port
    bool has_slope = false;
    double slope_k = 0;
};

inline std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows,
                            std::size_t n_ports, std::size_t n_flows) {
    os << "t_s";
    for (std::size_t i = 0; i < n_ports; ++i) os << ",q_pkts_p" << i;
    os << ",agg_rate_bps";
    for (std::size_t i = 0; i < n_flows; ++i) os << ",flow_rate_bps_f" << i;
    os << ",tx_bytes,drops,slope_k\n";
    for (const auto& r : rows) {
        os << format_g(r.t);
        for (std::size_t i = 0; i < n_ports; ++i) os << ',' << format_g(r.port_q[i]);
        os << ',' << format_g(r.agg_rate);
        for (std::size_t i = 0; i < n_flows; ++i) os << ',' << format_g(r.flow_rate[i]);
        os << ',' << r.tx_bytes << ',' << r.drops << ',';
        if (r.has_slope) os << format_g(r.slope_k);
        os << '\n';
    }
}

struct MetricsReport {
    double response_time = std::numeric_limits<double>::infinity(); // s
    double max_amplitude = 0;  // packets, after convergence
    double avg_q = 0;          // packets
    std::uint64_t drain_count = 0;
    double throughput_ratio = 0;
    std::uint64_t drop_count = 0;
};

// Derives the report from the monitored port's queue column.
//   response_time: earliest sample after which |q - q0| <= band holds for the
//   rest of the window (infinity if never). Post-convergence statistics fall
//   back to the full window when the trace never converges.
inline MetricsReport compute_metrics(const std::vector<TraceRow>& rows, std::size_t port_index,
                                     double q0, double band, double capacity_bps) {
    if (rows.empty()) throw std::invalid_argument("compute_metrics: empty trace");
    MetricsReport m;
    std::size_t first_in = rows.size(); // first index of the converged suffix
    for (std::size_t i = rows.size(); i-- > 0;) {
        if (std::abs(rows[i].port_q[port_index] - q0) > band) break;
        first_in = i;
    }
    const bool converged = first_in < rows.size();
    const std::size_t from = converged ? first_in : 0;
    if (converged) m.response_time = rows[first_in].t;

    double q_sum = 0;
    double amp = 0;
    bool in_drain = false;
    for (std::size_t i = from; i < rows.size(); ++i) {
        const double q = rows[i].port_q[port_index];
        q_sum += q;
        amp = std::max(amp, std::abs(q - q0));
        if (q == 0.0) {
            if (!in_drain) ++m.drain_count;
            in_drain = true;
        } else {
            in_drain = false;
        }
    }
    const auto count = static_cast<double>(rows.size() - from);
    m.avg_q = q_sum / count;
    m.max_amplitude = amp;

    const double t_span = rows.back().t - rows[from].t;
    if (t_span > 0) {
        const double bits = static_cast<double>(rows.back().tx_bytes - rows[from].tx_bytes) * 8.0;
        m.throughput_ratio = std::min(1.0, bits / (capacity_bps * t_span));
    }
    m.drop_count = rows.back().drops;
    return m;
}

// Maximal q == 0 runs at or after `from_t`; used for drain statistics with an
// explicit warmup cut.
inline std::uint64_t drain_runs_after(const std::vector<TraceRow>& rows, std::size_t port_index,
                                      double from_t) {
    std::uint64_t runs = 0;
    bool in_drain = false;
    for (const auto& r : rows) {
        if (r.t < from_t) continue;
        if (r.port_q[port_index] == 0.0) {
            if (!in_drain) ++runs;
            in_drain = true;
        } else {
            in_drain = false;
        }
    }
    return runs;
}

inline void write_metrics(std::ostream& os, const MetricsReport& m) {
    os << "response_time_s = "
       << (std::isinf(m.response_time) ? std::string("inf") : format_g(m.response_time)) << "\n";
    os << "max_amplitude_pkts = " << format_g(m.max_amplitude) << "\n";
    os << "avg_q_pkts = " << format_g(m.avg_q) << "\n";
    os << "drain_count = " << m.drain_count << "\n";
    os << "throughput_ratio = " << format_g(m.throughput_ratio) << "\n";
    os << "drop_count = " << m.drop_count << "\n";
}

} // namespace asmsim
