#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "asmsim/feedback.hpp"
#include "asmsim/rng.hpp"
#include "asmsim/time.hpp"

namespace asmsim {

enum class EnqueueResult : std::uint8_t { Accepted, Dropped };

// Congestion point: one egress port with a FIFO byte queue, Bernoulli
// sampling of incoming packets and feedback generation.
//
// Queue state never exceeds buffer_bytes; arrivals that do not fit are
// dropped and counted. Sampling happens once per arriving packet before the
// drop decision, so a saturated port keeps producing feedback.
class SwitchPort {
  public:
    SwitchPort() = default;
    SwitchPort(CpId cpid, double capacity_bps, std::uint64_t buffer_bytes,
               double q0_packets, double weight, double sample_p,
               std::uint32_t packet_unit_bytes, FeedbackType mode, RngStream rng)
        : cpid_(cpid),
          capacity_bps_(capacity_bps),
          buffer_bytes_(buffer_bytes),
          q0_packets_(q0_packets),
          weight_(weight),
          sample_p_(sample_p),
          packet_unit_bytes_(packet_unit_bytes),
          mode_(mode),
          rng_(rng) {
        // One quantizer unit covers the whole buffer in 127 steps.
        const double max_pkts =
            static_cast<double>(buffer_bytes_) / packet_unit_bytes_;
        quant_scale_ = std::max(1.0, std::ceil(max_pkts / 127.0));
    }

    CpId cpid() const { return cpid_; }
    double capacity_bps() const { return capacity_bps_; }
    std::uint64_t queue_bytes() const { return queue_bytes_; }
    double queue_packets() const {
        return static_cast<double>(queue_bytes_) / packet_unit_bytes_;
    }
    double q0_packets() const { return q0_packets_; }
    double weight() const { return weight_; }
    double quant_scale() const { return quant_scale_; }
    std::uint64_t drop_count() const { return drops_; }
    std::uint64_t enqueued_bytes() const { return enqueued_bytes_; }
    std::uint64_t departed_bytes() const { return departed_bytes_; }
    std::uint64_t tx_packets() const { return tx_packets_; }
    TimeNs busy_ns() const { return busy_ns_; }

    // Sample-then-enqueue is the per-arrival sequence used by the simulator.
    EnqueueResult enqueue(const Packet& pkt) {
        if (queue_bytes_ + pkt.size_bytes > buffer_bytes_) {
            ++drops_;
            return EnqueueResult::Dropped;
        }
        queue_bytes_ += pkt.size_bytes;
        enqueued_bytes_ += pkt.size_bytes;
        return EnqueueResult::Accepted;
    }

    // Called when the head packet finishes transmission.
    void depart(std::uint32_t size_bytes) {
        queue_bytes_ -= size_bytes;
        departed_bytes_ += size_bytes;
        ++tx_packets_;
        busy_ns_ += tx_time_ns(static_cast<std::int64_t>(size_bytes) * 8, capacity_bps_);
    }

    // Bernoulli sampling with per-port dedup: a success addressed to the same
    // sender as the previous emitted frame is skipped, and the success is not
    // consumed -- it stays armed until a packet from another sender arrives.
    std::optional<FeedbackFrame> maybe_sample(const Packet& pkt) {
        if (!pending_success_ && !rng_.bernoulli(sample_p_)) return std::nullopt;
        if (have_last_dst_ && pkt.source == last_feedback_dst_) {
            pending_success_ = true;
            return std::nullopt;
        }
        pending_success_ = false;

        const double q_pkts = queue_packets();
        const double qf = q_pkts - q0_packets_;
        const double dq = q_pkts - static_cast<double>(q_last_sample_bytes_) / packet_unit_bytes_;
        q_last_sample_bytes_ = queue_bytes_;

        FeedbackFrame f;
        f.cpid = cpid_;
        f.dst = pkt.source;
        if (mode_ == FeedbackType::Asm) {
            f.type = FeedbackType::Asm;
            f.qf_q = quantize(qf, quant_scale_);
            f.dq_q = quantize(dq, quant_scale_);
        } else {
            const double fb = compute_fb(qf, dq, weight_);
            if (fb >= 0) return std::nullopt; // QCN signals congestion only
            f.type = FeedbackType::Qcn;
            double mag = std::round(-fb / quant_scale_);
            if (mag > 63.0) mag = 63.0;
            if (mag < 1.0) mag = 1.0; // a congested sample always carries signal
            f.fb_q = static_cast<std::uint8_t>(mag);
        }
        last_feedback_dst_ = pkt.source;
        have_last_dst_ = true;
        return f;
    }

  private:
    CpId cpid_ = 0;
    double capacity_bps_ = 0;
    std::uint64_t buffer_bytes_ = 0;
    double q0_packets_ = 0;
    double weight_ = 0;
    double sample_p_ = 0;
    std::uint32_t packet_unit_bytes_ = 1500;
    FeedbackType mode_ = FeedbackType::Asm;
    RngStream rng_;
    double quant_scale_ = 1.0;

    std::uint64_t queue_bytes_ = 0;
    std::uint64_t q_last_sample_bytes_ = 0;
    NodeId last_feedback_dst_ = 0;
    bool have_last_dst_ = false;
    bool pending_success_ = false;

    std::uint64_t drops_ = 0;
    std::uint64_t enqueued_bytes_ = 0;
    std::uint64_t departed_bytes_ = 0;
    std::uint64_t tx_packets_ = 0;
    TimeNs busy_ns_ = 0;
};

} // namespace asmsim
