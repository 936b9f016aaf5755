#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "asmsim/network.hpp"
#include "asmsim/scenario.hpp"

namespace asmsim {

// Canned experiment scenarios. Time windows are desk scale: high-speed
// points shrink the window so every suite finishes in minutes while the
// control dynamics (RTT and sampling timescales) stay fully visible.

inline ScenarioSpec scenario_dumbbell3() {
    ScenarioSpec s = build_dumbbell(3, 1e9, 2e-6);
    s.algorithm = Algorithm::Asm;
    s.q0_packets = 64;
    s.t_end_ns = 500'000'000;
    return s;
}

inline ScenarioSpec scenario_small_queue(Algorithm algo) {
    ScenarioSpec s = build_dumbbell(10, 1e9, 2e-6);
    s.algorithm = algo;
    s.q0_packets = 5;
    s.weight = algo == Algorithm::Asm ? 32 : 2;
    // with a 5-packet target the near-target re-arm window must stay inside
    // the target itself, or the large gains bounce the queue off zero
    s.asm_cfg.bound_state = 4;
    for (auto& f : s.flows) f.rate_bps = 1.5e8; // mild overload, 1.5x fair share
    s.t_end_ns = 500'000'000;
    return s;
}

inline ScenarioSpec scenario_convergence(Algorithm algo) {
    ScenarioSpec s = build_dumbbell(5, 1e9, 2e-6);
    s.algorithm = algo;
    s.q0_packets = 64;
    s.weight = algo == Algorithm::Asm ? 32 : 2;
    // two flows at t=0, the rest joining every 0.5 s; departures every 0.5 s from t=2
    static constexpr std::array<std::int64_t, 5> starts = {0, 0, 500, 1000, 1500};
    static constexpr std::array<std::int64_t, 5> stops = {2000, 2500, 3000, 3500, 4000};
    for (std::size_t i = 0; i < s.flows.size(); ++i) {
        s.flows[i].start_ns = starts[i] * 1'000'000;
        s.flows[i].stop_ns = stops[i] * 1'000'000;
        s.flows[i].rate_bps = 5e8;
    }
    s.t_end_ns = 4'200'000'000;
    return s;
}

inline ScenarioSpec scenario_bandwidth_point(double capacity_bps) {
    ScenarioSpec s = build_dumbbell(10, capacity_bps, 2e-6);
    s.algorithm = Algorithm::Asm;
    s.q0_packets = 64;
    for (auto& f : s.flows) f.rate_bps = capacity_bps * 0.15; // 1.5x fair share
    s.t_end_ns = static_cast<TimeNs>(2e9 * (1e9 / capacity_bps)); // 2 s at 1 Gbps
    return s;
}

inline ScenarioSpec scenario_delay_point(Algorithm algo, double delay_s) {
    // Three links between source and sink so RTT = 6 * per-link delay. Two
    // sources keep the per-source share at C/2, where the QCN loop's delay
    // tolerance at 100 Gbps sits below a 60 us round trip.
    ScenarioSpec s = build_chain_dumbbell(2, 2, 100e9, delay_s);
    s.algorithm = algo;
    s.q0_packets = 64;
    s.weight = algo == Algorithm::Asm ? 32 : 2;
    for (auto& f : s.flows) f.rate_bps = 75e9; // 1.5x fair share
    s.t_end_ns = 20'000'000;
    return s;
}

// Four-switch chain with five flows; the long flow F1 crosses every segment
// while the short flows light up individual segments at different times, so
// the congested switch moves during the run. F2 and F3 start at a seeded
// random point in [0 s, 3 s] and last one second.
inline ScenarioSpec scenario_parking_lot() {
    ScenarioSpec s;
    s.algorithm = Algorithm::Asm;
    s.q0_packets = 64;
    s.t_end_ns = 5'000'000'000;
    const double cap = 1e9;
    const TimeNs d = 2000;
    for (int i = 0; i < 4; ++i) s.nodes.push_back({"sw" + std::to_string(i), true});
    for (int i = 0; i + 1 < 4; ++i)
        s.links.push_back({"sw" + std::to_string(i), "sw" + std::to_string(i + 1), cap, d});
    auto host = [&](const std::string& name, const std::string& sw) {
        s.nodes.push_back({name, false});
        s.links.push_back({name, sw, cap, d});
    };
    host("h1", "sw0"); host("h2", "sw0"); host("h3", "sw1"); host("h4", "sw2"); host("h5", "sw2");
    host("t1", "sw3"); host("t2", "sw1"); host("t3", "sw2"); host("t4", "sw3"); host("t5", "sw3");
    auto flow = [&](const std::string& src, const std::string& dst) {
        FlowSpec f;
        f.source = src;
        f.sink = dst;
        f.rate_bps = cap;
        f.packet_bytes = s.packet_bytes;
        s.flows.push_back(f);
        return s.flows.size() - 1;
    };
    const auto f1 = flow("h1", "t1");
    s.flows[f1].start_ns = 0;
    s.flows[f1].stop_ns = 5'000'000'000;
    const auto f2 = flow("h2", "t2");
    s.flows[f2].start_window_ns = {0, 3'000'000'000};
    s.flows[f2].duration_ns = 1'000'000'000;
    const auto f3 = flow("h3", "t3");
    s.flows[f3].start_window_ns = {0, 3'000'000'000};
    s.flows[f3].duration_ns = 1'000'000'000;
    const auto f4 = flow("h4", "t4");
    s.flows[f4].start_ns = 3'000'000'000;
    s.flows[f4].stop_ns = 4'000'000'000;
    const auto f5 = flow("h5", "t5");
    s.flows[f5].start_ns = 4'000'000'000;
    s.flows[f5].stop_ns = 5'000'000'000;
    return s;
}

struct SuitePoint {
    std::string name;
    ScenarioSpec spec;
    std::vector<std::pair<std::string, std::string>> columns; // extra aggregate columns
};

inline std::vector<SuitePoint> suite_points(const std::string& suite, std::uint64_t seed) {
    std::vector<SuitePoint> pts;
    auto add = [&](std::string name, ScenarioSpec spec,
                   std::vector<std::pair<std::string, std::string>> cols = {}) {
        spec.seed = seed;
        pts.push_back({std::move(name), std::move(spec), std::move(cols)});
    };
    if (suite == "sliding") {
        add("dumbbell3", scenario_dumbbell3());
    } else if (suite == "small-queue") {
        add("asm", scenario_small_queue(Algorithm::Asm), {{"algorithm", "asm"}});
        add("qcn", scenario_small_queue(Algorithm::Qcn), {{"algorithm", "qcn"}});
    } else if (suite == "convergence") {
        add("asm", scenario_convergence(Algorithm::Asm), {{"algorithm", "asm"}});
        add("qcn", scenario_convergence(Algorithm::Qcn), {{"algorithm", "qcn"}});
    } else if (suite == "param-sweep") {
        static constexpr std::array<double, 3> mult = {0.5, 1.0, 2.0};
        for (double ma : mult)
            for (double mb : mult)
                for (double mc : mult)
                    for (double md : mult) {
                        ScenarioSpec s = scenario_dumbbell3();
                        s.asm_cfg.caps[0] *= ma;
                        s.asm_cfg.caps[1] *= mb;
                        s.asm_cfg.caps[2] *= mc;
                        s.asm_cfg.caps[3] *= md;
                        char name[64];
                        std::snprintf(name, sizeof name, "aP%g_aM%g_bP%g_bM%g", ma, mb, mc, md);
                        const FluidSystem f = fluid_from_scenario(s, 1e9, 3, AsmRegime::Approach);
                        const SlidingCondition sc = sliding_condition(f);
                        add(name, s,
                            {{"mult_a_plus", format_g(ma)},
                             {"mult_a_minus", format_g(mb)},
                             {"mult_b_plus", format_g(mc)},
                             {"mult_b_minus", format_g(md)},
                             {"sliding_holds", sc.holds ? "1" : "0"}});
                    }
    } else if (suite == "bandwidth-sweep") {
        for (double g : {1.0, 10.0, 40.0, 100.0})
            add("c" + std::to_string(static_cast<int>(g)) + "g", scenario_bandwidth_point(g * 1e9),
                {{"capacity_gbps", format_g(g)}});
    } else if (suite == "delay-sweep") {
        for (auto algo : {Algorithm::Asm, Algorithm::Qcn})
            for (double us : {0.01, 1.0, 10.0}) {
                const std::string an = algo == Algorithm::Asm ? "asm" : "qcn";
                char name[64];
                std::snprintf(name, sizeof name, "%s_d%gus", an.c_str(), us);
                add(name, scenario_delay_point(algo, us * 1e-6),
                    {{"algorithm", an}, {"delay_us", format_g(us)}});
            }
    } else if (suite == "parking-lot") {
        add("parkinglot", scenario_parking_lot());
    } else {
        throw ConfigError("unknown suite: " + suite);
    }
    return pts;
}

struct SuiteRunResult {
    std::string name;
    MetricsReport metrics;
    std::vector<std::pair<std::string, std::string>> columns;
};

// Runs every point, writes per-point trace.csv and metrics.txt plus one
// aggregate.csv for the whole suite.
inline std::vector<SuiteRunResult> run_suite(const std::string& suite, std::uint64_t seed,
                                             const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    const auto pts = suite_points(suite, seed);
    std::vector<SuiteRunResult> results;
    fs::create_directories(out_dir / suite);
    for (const auto& pt : pts) {
        const fs::path dir = out_dir / suite / pt.name;
        fs::create_directories(dir);
        Network net(pt.spec);
        net.run();
        {
            std::ofstream tf(dir / "trace.csv", std::ios::binary);
            write_trace_csv(tf, net.trace(), net.n_ports(), net.n_flows());
        }
        const MetricsReport m = net.metrics(net.default_band());
        {
            std::ofstream mf(dir / "metrics.txt", std::ios::binary);
            write_metrics(mf, m);
        }
        results.push_back({pt.name, m, pt.columns});
    }
    std::ofstream agg(out_dir / suite / "aggregate.csv", std::ios::binary);
    agg << "point";
    for (const auto& c : results.front().columns) agg << ',' << c.first;
    agg << ",response_time_s,max_amplitude_pkts,avg_q_pkts,drain_count,throughput_ratio,"
           "drop_count\n";
    for (const auto& r : results) {
        agg << r.name;
        for (const auto& c : r.columns) agg << ',' << c.second;
        agg << ',' << (std::isinf(r.metrics.response_time) ? std::string("inf")
                                                           : format_g(r.metrics.response_time))
            << ',' << format_g(r.metrics.max_amplitude) << ',' << format_g(r.metrics.avg_q) << ','
            << r.metrics.drain_count << ',' << format_g(r.metrics.throughput_ratio) << ','
            << r.metrics.drop_count << '\n';
    }
    return results;
}

} // namespace asmsim
