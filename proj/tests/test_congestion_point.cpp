#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "asmsim/feedback.hpp"
#include "asmsim/rng.hpp"
#include "asmsim/switch_port.hpp"

using namespace asmsim;

namespace {

SwitchPort make_port(FeedbackType mode, double p = 1.0, double q0 = 64,
                     std::uint64_t buffer = 128 * 1024, double w = 32) {
    return SwitchPort(1, 1e9, buffer, q0, w, p, 1500, mode, RngStream(12345));
}

Packet pkt_from(NodeId src, std::uint32_t bytes = 1500) {
    Packet p;
    p.source = src;
    p.dest = 99;
    p.size_bytes = bytes;
    return p;
}

} // namespace

TEST_CASE("enqueue accepts while the buffer has room and drops at the wall") {
    SwitchPort port = make_port(FeedbackType::Asm);
    REQUIRE(port.enqueue(pkt_from(1)) == EnqueueResult::Accepted);
    REQUIRE(port.queue_bytes() == 1500);
    // fill up: 128 KB holds 87 packets of 1500 B
    for (int i = 1; i < 87; ++i) REQUIRE(port.enqueue(pkt_from(1)) == EnqueueResult::Accepted);
    REQUIRE(port.enqueue(pkt_from(1)) == EnqueueResult::Dropped);
    REQUIRE(port.drop_count() == 1);
    REQUIRE(port.queue_bytes() == 87u * 1500u);
}

TEST_CASE("overload grows the queue at the rate difference until it fills") {
    // arrivals at 1.5 Gbps against a 1 Gbps drain: +0.5 Gbps of backlog
    SwitchPort port = make_port(FeedbackType::Asm, 1e-12);
    const double arrival_interval_s = 1500.0 * 8 / 1.5e9;
    const double service_interval_s = 1500.0 * 8 / 1.0e9;
    double next_arrival = 0, next_service = service_interval_s;
    double t_check = 1e-3;
    bool checked = false;
    while (next_arrival < 2e-3) {
        if (next_arrival <= next_service) {
            (void)port.enqueue(pkt_from(1));
            next_arrival += arrival_interval_s;
        } else {
            if (port.queue_bytes() >= 1500) port.depart(1500);
            next_service += service_interval_s;
        }
        if (!checked && next_arrival >= t_check) {
            // 0.5 Gbps * 1 ms = 500 kbit ~ 41.7 packets of backlog
            REQUIRE(port.queue_packets() == Catch::Approx(41.7).margin(2.0));
            checked = true;
        }
    }
    // by 2 ms the 87-packet buffer has filled and drops have begun
    REQUIRE(port.drop_count() > 0);
    REQUIRE(port.queue_bytes() <= 128 * 1024);
}

TEST_CASE("sampling with p=1 reports queue offset and inter-sample change") {
    SwitchPort port = make_port(FeedbackType::Asm);
    // enqueue 64 packets so q == q0
    for (int i = 0; i < 64; ++i) (void)port.enqueue(pkt_from(2));
    const auto f = port.maybe_sample(pkt_from(3));
    REQUIRE(f.has_value());
    REQUIRE(f->type == FeedbackType::Asm);
    REQUIRE(f->qf_q == 0);  // q - q0 = 0
    REQUIRE(f->dq_q == 64); // first sample sees the full buildup
    REQUIRE(f->dst == 3);
    REQUIRE(f->cpid == port.cpid());

    // no queue movement since the last sample: dq == 0
    const auto g = port.maybe_sample(pkt_from(4));
    REQUIRE(g.has_value());
    REQUIRE(g->qf_q == 0);
    REQUIRE(g->dq_q == 0);
}

TEST_CASE("consecutive packets from one source yield exactly one frame") {
    SwitchPort port = make_port(FeedbackType::Asm);
    const auto f1 = port.maybe_sample(pkt_from(7));
    REQUIRE(f1.has_value());
    const auto f2 = port.maybe_sample(pkt_from(7));
    REQUIRE_FALSE(f2.has_value());
    // the suppressed success carries over to the next distinct sender
    const auto f3 = port.maybe_sample(pkt_from(8));
    REQUIRE(f3.has_value());
    REQUIRE(f3->dst == 8);
}

TEST_CASE("no two consecutive emitted frames share a destination") {
    SwitchPort port = make_port(FeedbackType::Asm, 0.37);
    RngStream traffic(5);
    NodeId last = 0;
    bool have_last = false;
    for (int i = 0; i < 20000; ++i) {
        const NodeId src = static_cast<NodeId>(traffic.uniform_i64(1, 4));
        if (const auto f = port.maybe_sample(pkt_from(src))) {
            if (have_last) REQUIRE(f->dst != last);
            last = f->dst;
            have_last = true;
        }
    }
}

TEST_CASE("emitted-frame count tracks the binomial expectation") {
    SwitchPort port = make_port(FeedbackType::Asm, 0.01);
    // unique source per packet: dedup can never suppress
    std::uint64_t emitted = 0;
    for (std::uint32_t i = 0; i < 1'000'000; ++i)
        if (port.maybe_sample(pkt_from(i + 1))) ++emitted;
    // 3 sigma around n*p with sigma = sqrt(n p (1-p)) ~ 99.5
    REQUIRE(emitted > 10'000 - 299);
    REQUIRE(emitted < 10'000 + 299);
}

TEST_CASE("qcn mode emits only for negative congestion measures") {
    SwitchPort port = make_port(FeedbackType::Qcn, 1.0, 64, 128 * 1024, 2);
    // empty queue: F_b = -(0-64) - w*0 = +64 -> no frame, even though sampled
    REQUIRE_FALSE(port.maybe_sample(pkt_from(1)).has_value());
    // congested: q = 80 packets, F_b = -(80-64) - 2*80 < 0 -> frame
    for (int i = 0; i < 80; ++i) (void)port.enqueue(pkt_from(2));
    const auto f = port.maybe_sample(pkt_from(3));
    REQUIRE(f.has_value());
    REQUIRE(f->type == FeedbackType::Qcn);
    REQUIRE(f->fb_q > 0);
    REQUIRE(f->fb_q <= 63);
}

TEST_CASE("compute_fb evaluates the boundary measure") {
    REQUIRE(compute_fb(0, 0, 32) == 0.0);
    REQUIRE(compute_fb(10, 2, 32) == -74.0);
    REQUIRE(compute_fb(-64, 1, 32) == 32.0);
}

TEST_CASE("quantize saturates and round-trips within half a step") {
    REQUIRE(quantize(0, 1) == 0);
    REQUIRE(quantize(1e9, 1) == 127);
    REQUIRE(quantize(-1e9, 1) == -128);
    REQUIRE(quantize(127.4, 1) == 127);
    REQUIRE_THROWS_AS(quantize(1, 0), std::invalid_argument);
    const double scale = 2.0;
    for (double v = -50.0; v <= 50.0; v += 0.01) {
        const double rt = dequantize(quantize(v, scale), scale);
        REQUIRE(std::abs(rt - v) <= scale / 2 + 1e-12);
    }
}

TEST_CASE("queue bytes equal enqueued minus departed at all times") {
    SwitchPort port = make_port(FeedbackType::Asm, 1e-12);
    RngStream r(3);
    for (int i = 0; i < 5000; ++i) {
        if (r.bernoulli(0.6))
            (void)port.enqueue(pkt_from(1));
        else if (port.queue_bytes() >= 1500)
            port.depart(1500);
        REQUIRE(port.queue_bytes() == port.enqueued_bytes() - port.departed_bytes());
    }
}

TEST_CASE("frame wire layout round-trips both payload types") {
    RngStream r(11);
    for (int i = 0; i < 500; ++i) {
        FeedbackFrame f;
        f.cpid = static_cast<CpId>(r.next_u64());
        f.dst = static_cast<NodeId>(r.next_u64());
        if (r.bernoulli(0.5)) {
            f.type = FeedbackType::Asm;
            f.qf_q = static_cast<std::int8_t>(r.uniform_i64(-128, 127));
            f.dq_q = static_cast<std::int8_t>(r.uniform_i64(-128, 127));
        } else {
            f.type = FeedbackType::Qcn;
            f.fb_q = static_cast<std::uint8_t>(r.uniform_i64(0, 63));
        }
        REQUIRE(decode_frame(encode_frame(f)) == f);
    }
    FrameBytes bogus{};
    bogus[8] = 9;
    REQUIRE_THROWS_AS(decode_frame(bogus), std::invalid_argument);
}

TEST_CASE("larger buffers widen the quantizer step") {
    const SwitchPort small = make_port(FeedbackType::Asm);
    REQUIRE(small.quant_scale() == 1.0);
    const SwitchPort big = make_port(FeedbackType::Asm, 1.0, 64, 512 * 1024);
    REQUIRE(big.quant_scale() == std::ceil(512.0 * 1024 / 1500 / 127));
}
