#pragma once

#include <algorithm>
#include <cstdint>

#include "asmsim/feedback.hpp"
#include "asmsim/time.hpp"

namespace asmsim {

enum class QcnPhase : std::uint8_t { FastRecovery, ActiveIncrease, HyperActiveIncrease };
enum class QcnCycleSource : std::uint8_t { ByteCounter, Timer };

struct QcnParams {
    double gd = 1.0 / 126.0;        // Gd * |Fb_max| = 1/2 with 6-bit feedback
    std::uint64_t bc_limit = 150 * 1000; // bytes per fast-recovery cycle
    std::uint32_t fr_cycles = 5;
    double r_ai_bps = 5e6;
    double r_hai_bps = 50e6;
    TimeNs timer_period_ns = 0; // 0 = derive from NIC speed at setup
    double r_min_bps = 1e6;
    // Correction mechanisms from the reference pseudocode lineage; the core
    // algorithm runs with both disabled.
    bool enable_trr = false; // target rate reduction
    bool enable_efr = false; // at most one decrease per cycle
};

struct QcnRpState {
    double rate_bps = 0;        // r
    double target_bps = 0;      // R
    std::uint64_t byte_count = 0;
    std::uint32_t cycle_index = 0;       // byte-counter cycles since last decrease
    std::uint32_t timer_cycle_index = 0; // timer cycles since last decrease
    QcnPhase phase = QcnPhase::FastRecovery;
    double nic_capacity_bps = 0;
    bool rd_done_this_cycle = false; // used only when enable_efr
};

inline QcnPhase qcn_phase_of(const QcnRpState& st, const QcnParams& p) {
    if (st.cycle_index >= p.fr_cycles && st.timer_cycle_index >= p.fr_cycles)
        return QcnPhase::HyperActiveIncrease;
    if (st.cycle_index >= p.fr_cycles) return QcnPhase::ActiveIncrease;
    return QcnPhase::FastRecovery;
}

// Rate decrease on a congestion frame: record the target, cut the rate by
// Gd*|Fb| (at most 50%), restart fast recovery.
inline void qcn_rate_decrease(QcnRpState& st, std::uint8_t fb_magnitude, const QcnParams& p) {
    if (fb_magnitude == 0) return;
    if (p.enable_efr && st.rd_done_this_cycle) return;
    if (p.enable_trr && st.target_bps > 10.0 * st.rate_bps) {
        st.target_bps /= 8.0;
    } else {
        st.target_bps = st.rate_bps;
    }
    st.rate_bps = std::max(st.rate_bps * (1.0 - p.gd * static_cast<double>(fb_magnitude)),
                           p.r_min_bps);
    st.byte_count = 0;
    st.cycle_index = 0;
    st.timer_cycle_index = 0;
    st.phase = QcnPhase::FastRecovery;
    st.rd_done_this_cycle = true;
}

// Byte limit for the current cycle; halved once the byte counter has entered
// active increase.
inline std::uint64_t qcn_cycle_limit(const QcnRpState& st, const QcnParams& p) {
    return (st.cycle_index >= p.fr_cycles) ? p.bc_limit / 2 : p.bc_limit;
}

inline TimeNs qcn_timer_period(const QcnRpState& st, const QcnParams& p) {
    return (st.timer_cycle_index >= p.fr_cycles) ? p.timer_period_ns / 2 : p.timer_period_ns;
}

// One recovery step, triggered by either the byte counter or the timer.
// Fast recovery does a binary search toward the recorded target; active and
// hyper-active increase first push the target up by a constant step.
inline void qcn_cycle_complete(QcnRpState& st, const QcnParams& p, QcnCycleSource src) {
    if (src == QcnCycleSource::ByteCounter)
        ++st.cycle_index;
    else
        ++st.timer_cycle_index;
    st.phase = qcn_phase_of(st, p);

    switch (st.phase) {
    case QcnPhase::FastRecovery:
        break;
    case QcnPhase::ActiveIncrease:
        st.target_bps += p.r_ai_bps;
        break;
    case QcnPhase::HyperActiveIncrease:
        st.target_bps += p.r_hai_bps;
        break;
    }
    st.target_bps = std::min(st.target_bps, st.nic_capacity_bps);
    st.rate_bps = std::min(0.5 * (st.rate_bps + st.target_bps), st.nic_capacity_bps);
    st.rd_done_this_cycle = false;
}

} // namespace asmsim
