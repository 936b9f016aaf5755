#pragma once

#include <deque>
#include <map>
#include <memory>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "asmsim/asm_rp.hpp"
#include "asmsim/event_queue.hpp"
#include "asmsim/qcn_rp.hpp"
#include "asmsim/scenario.hpp"
#include "asmsim/switch_port.hpp"
#include "asmsim/trace.hpp"

namespace asmsim {

// Instantiates a scenario: hosts with rate limiters, switch egress ports as
// congestion points, static shortest-path forwarding, feedback return path
// modeled as pure propagation delay. Single-threaded, owned by one Simulator.
class Network {
  public:
    explicit Network(const ScenarioSpec& spec) : spec_(spec) {
        validate_scenario(spec_);
        build_graph();
        build_ports();
        build_flows();
        pick_monitor();
    }

    // Runs the scenario to t_end and leaves the trace available.
    SimSummary run() {
        schedule_initial_events();
        return sim_.run_until(spec_.t_end_ns);
    }

    const std::vector<TraceRow>& trace() const { return trace_; }
    std::size_t n_ports() const { return ports_.size(); }
    std::size_t n_flows() const { return flows_.size(); }
    std::size_t monitor_port() const { return monitor_port_; }
    double monitor_capacity_bps() const { return ports_[monitor_port_].cp.capacity_bps(); }
    const SwitchPort& port(std::size_t i) const { return ports_[i].cp; }
    std::uint64_t delivered_bytes(const std::string& host) const {
        return delivered_.at(node_id(host));
    }
    std::uint64_t total_delivered_bytes() const {
        std::uint64_t sum = 0;
        for (const auto& [node, bytes] : delivered_) sum += bytes;
        return sum;
    }
    double flow_rate(std::size_t i) const { return flows_[i].current_rate(); }
    TimeNs resolved_start_ns(std::size_t i) const { return flows_[i].start_ns; }

    MetricsReport metrics(double band) const {
        return compute_metrics(trace_, monitor_port_, spec_.q0_packets, band,
                               monitor_capacity_bps());
    }

    double default_band() const {
        return std::max(spec_.asm_cfg.bound_state, 0.1 * spec_.q0_packets);
    }

  private:
    struct PortRuntime {
        SwitchPort cp;
        int from_node = 0; // owning switch
        int to_node = 0;   // link peer
        TimeNs delay_ns = 0;
        std::deque<Packet> fifo;
        bool busy = false;
    };

    struct FlowRuntime {
        FlowSpec spec;
        int src = 0;
        int dst = 0;
        std::uint32_t id = 0;
        TimeNs start_ns = 0;
        TimeNs stop_ns = kTimeNever;
        bool active = false;
        std::uint64_t next_seq = 0;
        double nic_bps = 0;
        // exactly one rate limiter is live, per the scenario's algorithm
        AsmRpState asm_state;
        QcnRpState qcn_state;
        AsmParams asm_params;
        QcnParams qcn_params;
        Algorithm algo = Algorithm::Asm;
        std::uint64_t timer_generation = 0;
        std::vector<char> crosses; // per-port membership of the forward path

        double current_rate() const {
            if (!active) return 0;
            return algo == Algorithm::Asm ? asm_state.rate_bps : qcn_state.rate_bps;
        }
    };

    // --- construction -------------------------------------------------------

    int node_id(const std::string& name) const {
        const auto it = node_index_.find(name);
        if (it == node_index_.end()) throw ConfigError("unknown node: " + name);
        return it->second;
    }

    void build_graph() {
        for (const auto& n : spec_.nodes) {
            node_index_[n.name] = static_cast<int>(is_switch_.size());
            is_switch_.push_back(n.is_switch);
        }
        const int n = static_cast<int>(is_switch_.size());
        adj_.assign(n, {});
        for (const auto& l : spec_.links) {
            const int a = node_id(l.node_a);
            const int b = node_id(l.node_b);
            adj_[a].push_back({b, l.capacity_bps, l.delay_ns});
            adj_[b].push_back({a, l.capacity_bps, l.delay_ns});
        }
        // hop-count shortest paths; ties resolved by neighbor scan order
        next_hop_.assign(n, std::vector<int>(n, -1));
        delay_to_.assign(n, std::vector<TimeNs>(n, 0));
        for (int dst = 0; dst < n; ++dst) {
            std::vector<int> dist(n, -1);
            std::queue<int> bfs;
            bfs.push(dst);
            dist[dst] = 0;
            while (!bfs.empty()) {
                const int u = bfs.front();
                bfs.pop();
                for (const auto& e : adj_[u]) {
                    if (dist[e.peer] != -1) continue;
                    dist[e.peer] = dist[u] + 1;
                    next_hop_[e.peer][dst] = u;
                    delay_to_[e.peer][dst] = delay_to_[u][dst] + e.delay_ns;
                    bfs.push(e.peer);
                }
            }
        }
    }

    void build_ports() {
        const FeedbackType mode =
            spec_.algorithm == Algorithm::Asm ? FeedbackType::Asm : FeedbackType::Qcn;
        for (int u = 0; u < static_cast<int>(is_switch_.size()); ++u) {
            if (!is_switch_[u]) continue;
            for (const auto& e : adj_[u]) {
                const CpId cpid = static_cast<CpId>(ports_.size());
                PortRuntime pr;
                pr.cp = SwitchPort(cpid, e.capacity_bps, spec_.buffer_bytes, spec_.q0_packets,
                                   spec_.weight, spec_.sampling_p, spec_.packet_bytes, mode,
                                   RngStream::derive(spec_.seed, 0x5000 + cpid));
                pr.from_node = u;
                pr.to_node = e.peer;
                pr.delay_ns = e.delay_ns;
                port_index_[{u, e.peer}] = static_cast<int>(ports_.size());
                ports_.push_back(std::move(pr));
            }
        }
    }

    void build_flows() {
        for (std::size_t i = 0; i < spec_.flows.size(); ++i) {
            const FlowSpec& fs = spec_.flows[i];
            FlowRuntime fr;
            fr.spec = fs;
            fr.id = static_cast<std::uint32_t>(i);
            fr.src = node_id(fs.source);
            fr.dst = node_id(fs.sink);
            fr.nic_bps = spec_.host_link_capacity(fs.source);
            fr.algo = spec_.algorithm;
            fr.start_ns = fs.start_ns;
            if (fs.start_window_ns) {
                RngStream r = RngStream::derive(spec_.seed, 0x7000 + i);
                fr.start_ns = r.uniform_i64(fs.start_window_ns->first, fs.start_window_ns->second);
            }
            if (fs.stop_ns)
                fr.stop_ns = *fs.stop_ns;
            else if (fs.duration_ns)
                fr.stop_ns = fr.start_ns + *fs.duration_ns;

            fr.asm_params = asm_params_for(spec_, fr.nic_bps);
            fr.asm_state.rate_bps = fs.rate_bps;
            fr.asm_state.nic_capacity_bps = fr.nic_bps;
            fr.asm_state.r_min_bps = spec_.asm_cfg.r_min_bps;
            fr.qcn_params = qcn_params_for(spec_, fr.nic_bps);
            fr.qcn_state.rate_bps = fs.rate_bps;
            fr.qcn_state.target_bps = fs.rate_bps;
            fr.qcn_state.nic_capacity_bps = fr.nic_bps;

            fr.crosses.assign(ports_.size(), 0);
            int u = fr.src;
            while (u != fr.dst) {
                const int v = next_hop_[u][fr.dst];
                if (v < 0) throw ConfigError("no path from " + fs.source + " to " + fs.sink);
                if (const auto it = port_index_.find({u, v}); it != port_index_.end())
                    fr.crosses[it->second] = 1;
                u = v;
            }
            if (flow_of_host_.count(fr.src))
                throw ConfigError("one rate limiter per source: host " + fs.source +
                                  " already has a flow");
            flow_of_host_[fr.src] = static_cast<int>(i);
            flows_.push_back(std::move(fr));
        }
        for (int u = 0; u < static_cast<int>(is_switch_.size()); ++u)
            if (!is_switch_[u]) delivered_[u] = 0;
    }

    void pick_monitor() {
        if (spec_.monitor != "auto") {
            monitor_port_ = static_cast<std::size_t>(std::stoul(spec_.monitor));
            if (monitor_port_ >= ports_.size())
                throw ConfigError("monitor port out of range");
            return;
        }
        // the egress port crossed by the most flows; ties go to the lowest id
        std::size_t best = 0, best_count = 0;
        for (std::size_t pi = 0; pi < ports_.size(); ++pi) {
            std::size_t count = 0;
            for (const auto& f : flows_) count += f.crosses[pi];
            if (count > best_count) {
                best = pi;
                best_count = count;
            }
        }
        monitor_port_ = best;
    }

    // --- events -------------------------------------------------------------

    void schedule_initial_events() {
        for (auto& f : flows_) {
            sim_.schedule(f.start_ns, EventKind::FlowStart, [this, &f] { start_flow(f); });
            if (f.stop_ns != kTimeNever)
                sim_.schedule(f.stop_ns, EventKind::FlowStop, [&f] { f.active = false; });
        }
        const TimeNs period =
            spec_.trace_period_ns > 0 ? spec_.trace_period_ns : auto_trace_period(spec_);
        for (TimeNs t = 0; t <= spec_.t_end_ns; t += period)
            sim_.schedule(t, EventKind::TraceSample, [this] { sample_trace(); });
    }

    void start_flow(FlowRuntime& f) {
        f.active = true;
        if (f.algo == Algorithm::Qcn) arm_qcn_timer(f);
        send_next_packet(f);
    }

    void arm_qcn_timer(FlowRuntime& f) {
        const std::uint64_t gen = ++f.timer_generation;
        const TimeNs period = qcn_timer_period(f.qcn_state, f.qcn_params);
        sim_.schedule(sim_.now() + period, EventKind::TimerExpiry, [this, &f, gen] {
            if (!f.active || gen != f.timer_generation) return;
            qcn_cycle_complete(f.qcn_state, f.qcn_params, QcnCycleSource::Timer);
            arm_qcn_timer(f);
        });
    }

    void send_next_packet(FlowRuntime& f) {
        if (!f.active || sim_.now() >= f.stop_ns) {
            f.active = false;
            return;
        }
        Packet pkt;
        pkt.source = static_cast<NodeId>(f.src);
        pkt.dest = static_cast<NodeId>(f.dst);
        pkt.flow = f.id;
        pkt.size_bytes = f.spec.packet_bytes;
        pkt.seq = f.next_seq++;

        // host NIC: serialize onto the access link, then propagate
        const int hop = next_hop_[f.src][f.dst];
        TimeNs link_delay = 0;
        double link_cap = f.nic_bps;
        for (const auto& e : adj_[f.src])
            if (e.peer == hop) {
                link_delay = e.delay_ns;
                link_cap = e.capacity_bps;
                break;
            }
        const std::int64_t bits = static_cast<std::int64_t>(pkt.size_bytes) * 8;
        const TimeNs arrive = sim_.now() + tx_time_ns(bits, link_cap) + link_delay;
        sim_.schedule(arrive, EventKind::PacketArrival,
                      [this, pkt, hop] { arrive_at_node(pkt, hop); });

        if (f.algo == Algorithm::Qcn) {
            f.qcn_state.byte_count += pkt.size_bytes;
            if (f.qcn_state.byte_count >= qcn_cycle_limit(f.qcn_state, f.qcn_params)) {
                f.qcn_state.byte_count = 0;
                qcn_cycle_complete(f.qcn_state, f.qcn_params, QcnCycleSource::ByteCounter);
            }
        }
        const double rate = f.current_rate();
        if (rate <= 0) return;
        const TimeNs gap = tx_time_ns(bits, rate);
        sim_.schedule(sim_.now() + gap, EventKind::PacketDeparture,
                      [this, &f] { send_next_packet(f); });
    }

    void arrive_at_node(const Packet& pkt, int node) {
        if (!is_switch_[node]) {
            delivered_[node] += pkt.size_bytes;
            return;
        }
        const int hop = next_hop_[node][pkt.dest];
        const int pi = port_index_.at({node, hop});
        PortRuntime& port = ports_[pi];

        if (auto frame = port.cp.maybe_sample(pkt)) {
            const TimeNs fb_delay = delay_to_[node][frame->dst];
            const FeedbackFrame f = *frame;
            sim_.schedule(sim_.now() + fb_delay, EventKind::FeedbackDelivery,
                          [this, f] { deliver_feedback(f); });
        }
        if (port.cp.enqueue(pkt) == EnqueueResult::Accepted) {
            port.fifo.push_back(pkt);
            if (!port.busy) start_transmission(pi);
        }
    }

    void start_transmission(int pi) {
        PortRuntime& port = ports_[pi];
        port.busy = true;
        const Packet pkt = port.fifo.front();
        const std::int64_t bits = static_cast<std::int64_t>(pkt.size_bytes) * 8;
        sim_.schedule(sim_.now() + tx_time_ns(bits, port.cp.capacity_bps()),
                      EventKind::PacketDeparture, [this, pi] { finish_transmission(pi); });
    }

    void finish_transmission(int pi) {
        PortRuntime& port = ports_[pi];
        const Packet pkt = port.fifo.front();
        port.fifo.pop_front();
        port.cp.depart(pkt.size_bytes);
        const int next = port.to_node;
        sim_.schedule(sim_.now() + port.delay_ns, EventKind::PacketArrival,
                      [this, pkt, next] { arrive_at_node(pkt, next); });
        if (!port.fifo.empty())
            start_transmission(pi);
        else
            port.busy = false;
    }

    void deliver_feedback(const FeedbackFrame& frame) {
        const auto it = flow_of_host_.find(static_cast<int>(frame.dst));
        if (it == flow_of_host_.end()) return; // stale frame for a finished host
        FlowRuntime& f = flows_[it->second];
        if (f.algo == Algorithm::Asm) {
            asm_on_feedback(frame, f.asm_state, f.asm_params);
        } else {
            if (frame.type != FeedbackType::Qcn || frame.fb_q == 0) return;
            qcn_rate_decrease(f.qcn_state, frame.fb_q, f.qcn_params);
            if (f.active) arm_qcn_timer(f); // decrease restarts the timer cycle
        }
    }

    void sample_trace() {
        TraceRow row;
        row.t = to_seconds(sim_.now());
        row.port_q.reserve(ports_.size());
        for (const auto& p : ports_) row.port_q.push_back(p.cp.queue_packets());
        double agg = 0;
        row.flow_rate.reserve(flows_.size());
        for (const auto& f : flows_) {
            const double r = f.current_rate();
            row.flow_rate.push_back(r);
            if (f.crosses[monitor_port_]) agg += r;
        }
        row.agg_rate = agg;
        row.tx_bytes = ports_[monitor_port_].cp.departed_bytes();
        row.drops = ports_[monitor_port_].cp.drop_count();
        if (!trace_.empty()) {
            const TraceRow& prev = trace_.back();
            const double dq = row.port_q[monitor_port_] - prev.port_q[monitor_port_];
            if (dq != 0.0) {
                row.has_slope = true;
                row.slope_k = (row.agg_rate - prev.agg_rate) / dq;
            }
        }
        trace_.push_back(std::move(row));
    }

    struct Edge {
        int peer;
        double capacity_bps;
        TimeNs delay_ns;
    };

    ScenarioSpec spec_;
    Simulator sim_;
    std::map<std::string, int> node_index_;
    std::vector<bool> is_switch_;
    std::vector<std::vector<Edge>> adj_;
    std::vector<std::vector<int>> next_hop_;
    std::vector<std::vector<TimeNs>> delay_to_;
    std::vector<PortRuntime> ports_;
    std::map<std::pair<int, int>, int> port_index_;
    std::vector<FlowRuntime> flows_;
    std::map<int, int> flow_of_host_;
    std::map<int, std::uint64_t> delivered_;
    std::size_t monitor_port_ = 0;
    std::vector<TraceRow> trace_;
};

} // namespace asmsim
