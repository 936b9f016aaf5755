// Acceptance suite. Each criterion runs standalone (argv[1] = 1..10) or all
// together (no argument), printing one pass/fail line per criterion. The
// process exits nonzero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "analytic_ode.hpp"
#include "asmsim/delay_robustness.hpp"
#include "asmsim/fluid.hpp"
#include "asmsim/network.hpp"
#include "asmsim/qcn_stability.hpp"
#include "asmsim/scenario.hpp"
#include "asmsim/suites.hpp"

using namespace asmsim;

#ifndef ASMSIM_SCENARIO_DIR
#define ASMSIM_SCENARIO_DIR "scenarios"
#endif

namespace {

struct Check {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string scenario_file(const std::string& name) {
    return std::string(ASMSIM_SCENARIO_DIR) + "/" + name;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. sliding existence check on the hardware-default gain schedule

Check criterion_1() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioSpec s = build_dumbbell(3, 1e9, 2e-6);
    const FluidSystem f = fluid_from_scenario(s, 1e9, 3, AsmRegime::Approach);
    const SlidingCondition sc = sliding_condition(f);
    c.require(sc.holds, "expected holds=true on default caps, got lhs_minus=" +
                            fmt(sc.lhs_minus) + " lhs_plus=" + fmt(sc.lhs_plus) +
                            " (default caps tie b_minus to w*a_minus exactly, which makes "
                            "lhs_minus identically 1, so the strict first inequality can "
                            "never be satisfied by this schedule)");
    ScenarioSpec s0 = s;
    s0.asm_cfg.caps[3] = 1e-30; // b_minus forced to (effectively) zero
    const FluidSystem f0 = fluid_from_scenario(s0, 1e9, 3, AsmRegime::Approach);
    c.require(!sliding_condition(f0).holds, "b_minus=0 must fail the check");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < 1.0, "runtime exceeded 1 s");
    return c;
}

// ---------------------------------------------------------------------------
// 2. QCN delay lower bound against the reference thresholds

Check criterion_2() {
    Check c;
    const QcnReferenceParams ref = load_qcn_reference(scenario_file("qcn_fluid_reference.cfg"));
    const double t10 = qcn_delay_lower_bound(make_qcn_stability(10e9, ref));
    const double t100 = qcn_delay_lower_bound(make_qcn_stability(100e9, ref));
    c.note("tau(10G)=" + fmt(t10 * 1e6) + "us tau(100G)=" + fmt(t100 * 1e6) + "us");
    c.require(std::abs(t10 - 271e-6) <= 0.15 * 271e-6, "tau(10G) outside 271us +/- 15%");
    c.require(std::abs(t100 - 27e-6) <= 0.15 * 27e-6, "tau(100G) outside 27us +/- 15%");
    double prev = 1.0;
    for (double cap : {10e9, 25e9, 40e9, 100e9}) {
        const double tau = qcn_delay_lower_bound(make_qcn_stability(cap, ref));
        c.require(tau < prev, "bound not strictly decreasing at " + fmt(cap));
        prev = tau;
    }
    const double ratio = t10 / t100;
    c.require(ratio >= 8.0 && ratio <= 12.0, "tau(10G)/tau(100G) outside [8,12]");
    return c;
}

// ---------------------------------------------------------------------------
// 3. sliding-phase closed form against the integrated trajectory

Check criterion_3() {
    Check c;
    FluidSystem f;
    f.sources = 1;
    f.capacity = 1;
    f.sample_p = 1;
    f.weight = 2;
    f.q0 = 100;
    f.a_plus = 1.0;
    f.b_plus = 0.5;
    f.a_minus = 1.0;
    f.b_minus = 2.525;
    f.x1 = 50;
    f.x2 = 0;
    c.require(sliding_condition(f).holds, "demo parameters must satisfy the sliding condition");

    const double dt = 1e-3;
    const Trajectory tr = integrate_fluid(f, 12.0, dt);
    // first entry into a narrow band around the boundary line
    std::size_t entry = tr.size();
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (std::abs(fluid_fb(f, tr[i].x1, tr[i].x2)) <= 0.5) {
            entry = i;
            break;
        }
    }
    c.require(entry < tr.size(), "trajectory never reached the boundary band");
    if (!c.pass) return c;

    // compare the queue against the exponential sliding solution anchored at entry
    const double q_entry = f.q0 + tr[entry].x1;
    const double t_entry = tr[entry].t;
    double num = 0, den = 0;
    for (std::size_t i = entry; i < tr.size(); ++i) {
        const double q_sim = f.q0 + tr[i].x1;
        FluidSystem shifted = f;
        const double q_ref = sliding_queue_solution(q_entry, shifted, tr[i].t - t_entry);
        num += (q_sim - q_ref) * (q_sim - q_ref);
        den += (q_ref - f.q0) * (q_ref - f.q0);
    }
    const double rms = std::sqrt(num / den);
    c.note("rms=" + fmt(rms * 100) + "%");
    c.require(rms <= 0.02, "rms deviation above 2%");

    // e-folding time of the fitted exponential: least squares on log|x1|
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = entry; i < tr.size(); ++i) {
        if (std::abs(tr[i].x1) < 1e-6) continue;
        const double x = tr[i].t;
        const double y = std::log(std::abs(tr[i].x1));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    const double slope = (static_cast<double>(n) * sxy - sx * sy) /
                         (static_cast<double>(n) * sxx - sx * sx);
    const double efold = -1.0 / slope;
    const double expected = f.weight / (f.sample_p * f.capacity);
    c.note("efold=" + fmt(efold) + " expected=" + fmt(expected));
    c.require(std::abs(efold - expected) <= 0.05 * expected, "e-folding time off by more than 5%");
    return c;
}

// ---------------------------------------------------------------------------
// 4. frozen-branch integration against the eigenvalue-built solution

Check criterion_4() {
    Check c;
    RngStream r(20240901);
    int done = 0;
    while (done < 50) {
        FluidSystem f;
        f.sources = 1 + std::floor(r.next_double() * 8);
        f.capacity = 0.5 + 3.5 * r.next_double();
        f.sample_p = 0.2 + 0.8 * r.next_double();
        f.weight = 1.5 + 4.5 * r.next_double();
        const double pc2 = f.sample_p * f.sample_p * f.capacity * f.capacity;
        const double margin = pc2 / (f.weight * f.sources);
        // draw gains satisfying the sliding condition:
        //   b- above w a- + p^2C^2/(wN), b+ below w a+ + p^2C^2/(wN)
        f.a_minus = 0.05 + 1.5 * r.next_double();
        f.b_minus = (f.weight * f.a_minus + margin) * (1.02 + 0.9 * r.next_double());
        f.a_plus = 0.1 + 2.0 * r.next_double();
        f.b_plus = (f.weight * f.a_plus + margin) * (0.05 + 0.8 * r.next_double());
        if (!sliding_condition(f).holds) continue;

        for (auto br : {FluidBranch::Plus, FluidBranch::Minus}) {
            const double a = br == FluidBranch::Plus ? f.a_plus : f.a_minus;
            const double b = br == FluidBranch::Plus ? f.b_plus : f.b_minus;
            const double damping = f.sources * b / (f.sample_p * f.capacity);
            const double stiffness = f.sources * a;
            const asmsim_test::LinearOde2 oracle(damping, stiffness, 3.0, -1.0);
            if (oracle.root_separation() < 0.05) continue; // skip near-repeated roots
            const double rate = std::max(std::abs(oracle.l1.real()), 1e-3);
            const double t_end = std::min(10.0 / rate, 200.0);
            const double rho = std::max(std::abs(oracle.l1), std::abs(oracle.l2));
            const double dt = std::min(0.02 / rho, t_end / 400.0);

            FluidSystem start = f;
            start.x1 = 3.0;
            start.x2 = -1.0;
            const Trajectory tr = integrate_fluid(start, t_end, dt, br);
            double max_err = 0, max_ref = 0;
            for (const auto& p : tr) {
                max_err = std::max(max_err, std::abs(p.x1 - oracle.x(p.t)));
                max_ref = std::max(max_ref, std::abs(oracle.x(p.t)));
            }
            const double rel = max_err / max_ref;
            c.require(rel <= 1e-6,
                      "draw " + std::to_string(done) + " branch error " + fmt(rel));
        }
        ++done;
    }
    return c;
}

// ---------------------------------------------------------------------------
// 5. delayed model versus drifted-parameter rewrite, pointwise

Check criterion_5() {
    Check c;
    RngStream r(5150);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        FluidSystem f;
        f.sources = 1 + std::floor(r.next_double() * 10);
        f.capacity = 0.5 + 4 * r.next_double();
        f.sample_p = 0.1 + 0.9 * r.next_double();
        f.weight = 1 + 5 * r.next_double();
        f.a_plus = 3 * r.next_double();
        f.a_minus = 3 * r.next_double();
        f.b_plus = 3 * r.next_double();
        f.b_minus = 3 * r.next_double();
        const double tau = 0.2 * r.next_double();
        const DelayRobustnessParams d = delay_robustness_bounds(f, tau);
        const double x1 = r.uniform_i64(-1000, 1000) / 10.0;
        const double x2 = r.uniform_i64(-1000, 1000) / 10.0;
        const double e1 = r.uniform_i64(-100, 100) / 50.0;
        const double e2 = r.uniform_i64(-100, 100) / 50.0;
        const double sign = r.bernoulli(0.5) ? 1.0 : -1.0;
        const FluidRhs lhs = prop_rhs_delayed(d, x1, x2, e1, e2, sign);
        const FluidRhs rhs = prop_rhs_drifted(d, x1, x2, e1, e2, sign);
        const double scale = std::max({1.0, std::abs(lhs.dx2), std::abs(rhs.dx2)});
        worst = std::max(worst, std::abs(lhs.dx2 - rhs.dx2) / scale);
    }
    c.note("max relative gap " + fmt(worst));
    c.require(worst <= 1e-12, "forms disagree beyond machine precision");
    return c;
}

// ---------------------------------------------------------------------------
// 6. dumbbell convergence, nonempty buffer, full throughput

Check criterion_6() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioSpec s = load_scenario(scenario_file("dumbbell3.cfg"));
    Network net(s);
    net.run();
    const double band = net.default_band();
    const MetricsReport m = net.metrics(band);
    c.note("response=" + fmt(m.response_time) + "s amp=" + fmt(m.max_amplitude) +
           " thr=" + fmt(m.throughput_ratio));
    c.require(m.response_time <= 0.1, "no convergence within 100 ms");
    c.require(m.drain_count == 0, "buffer drained after convergence");
    c.require(m.throughput_ratio >= 0.95, "post-convergence throughput below 95%");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < 120.0, "runtime exceeded 2 minutes");
    return c;
}

// ---------------------------------------------------------------------------
// 7. delay tolerance contrast at 100 Gbps (round trip 60 us)

Check criterion_7() {
    Check c;
    const double warmup_s = 0.005;
    auto drains = [&](Algorithm algo, double delay_s) {
        Network net(scenario_delay_point(algo, delay_s));
        net.run();
        return drain_runs_after(net.trace(), net.monitor_port(), warmup_s);
    };
    const auto asm_delayed = drains(Algorithm::Asm, 10e-6);
    const auto qcn_delayed = drains(Algorithm::Qcn, 10e-6);
    const auto asm_fast = drains(Algorithm::Asm, 10e-9);
    const auto qcn_fast = drains(Algorithm::Qcn, 10e-9);
    c.note("drains@60us: asm=" + std::to_string(asm_delayed) + " qcn=" +
           std::to_string(qcn_delayed) + "; near-zero: asm=" + std::to_string(asm_fast) +
           " qcn=" + std::to_string(qcn_fast));
    c.require(qcn_delayed >= 5, "qcn at 60 us round trip shows fewer than 5 drains");
    c.require(asm_delayed == 0, "asm drained at 60 us round trip");
    c.require(asm_fast == 0, "asm drained at near-zero delay");
    c.require(qcn_fast == 0, "qcn drained at near-zero delay");
    return c;
}

// ---------------------------------------------------------------------------
// 8. oscillation amplitude is bandwidth-invariant in packets

Check criterion_8() {
    Check c;
    double amp_1g = 0, amp_100g = 0;
    for (double gbps : {1.0, 10.0, 40.0, 100.0}) {
        Network net(scenario_bandwidth_point(gbps * 1e9));
        net.run();
        const MetricsReport m = net.metrics(net.default_band());
        c.require(m.throughput_ratio >= 0.95,
                  "throughput below 95% at " + fmt(gbps) + " Gbps");
        c.require(!std::isinf(m.response_time), "no convergence at " + fmt(gbps) + " Gbps");
        if (gbps == 1.0) amp_1g = m.max_amplitude;
        if (gbps == 100.0) amp_100g = m.max_amplitude;
    }
    c.note("amplitude 1G=" + fmt(amp_1g) + " 100G=" + fmt(amp_100g));
    c.require(amp_100g <= 3.0 * amp_1g, "amplitude grew more than 3x from 1G to 100G");
    return c;
}

// ---------------------------------------------------------------------------
// 9. average queue under doubled/halved approach gains

Check criterion_9() {
    Check c;
    const auto pts = suite_points("param-sweep", 1);
    double default_avg = 0;
    std::vector<std::pair<std::string, double>> satisfied;
    int excluded = 0;
    for (const auto& pt : pts) {
        Network net(pt.spec);
        net.run();
        const MetricsReport m = net.metrics(net.default_band());
        bool holds = false, is_default = true;
        for (const auto& col : pt.columns) {
            if (col.first == "sliding_holds") holds = col.second == "1";
            else if (col.second != "1") is_default = false;
        }
        if (is_default) default_avg = m.avg_q;
        if (holds)
            satisfied.emplace_back(pt.name, m.avg_q);
        else
            ++excluded;
    }
    c.note("default avg_q=" + fmt(default_avg) + ", " + std::to_string(satisfied.size()) +
           " combos satisfy the sliding condition, " + std::to_string(excluded) + " excluded");
    c.require(default_avg > 0, "missing default combo");
    c.require(!satisfied.empty(), "no combos satisfied the sliding condition");
    for (const auto& [name, avg] : satisfied)
        c.require(avg >= 0.5 * default_avg && avg <= 2.0 * default_avg,
                  name + " avg_q=" + fmt(avg) + " outside [0.5x, 2x] of default");
    return c;
}

// ---------------------------------------------------------------------------
// 10. bit-identical reruns

Check criterion_10() {
    Check c;
    auto run_trace = [&](const ScenarioSpec& s) {
        Network net(s);
        net.run();
        std::ostringstream os;
        write_trace_csv(os, net.trace(), net.n_ports(), net.n_flows());
        return os.str();
    };
    ScenarioSpec s = load_scenario(scenario_file("dumbbell3.cfg"));
    s.t_end_ns = 200'000'000;
    c.require(run_trace(s) == run_trace(s), "dumbbell rerun differs");

    const ScenarioSpec pk = suite_points("parking-lot", 7).front().spec;
    c.require(run_trace(pk) == run_trace(pk), "parking-lot rerun differs");

    const ScenarioSpec dl = suite_points("delay-sweep", 3)[5].spec; // qcn at 10 us
    c.require(run_trace(dl) == run_trace(dl), "delay-sweep rerun differs");
    return c;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Check()>>> table = {
        {"sliding existence check", criterion_1},
        {"qcn delay lower bound", criterion_2},
        {"sliding-phase closed form", criterion_3},
        {"fixed-branch integration oracle", criterion_4},
        {"delayed-model algebraic split", criterion_5},
        {"dumbbell convergence", criterion_6},
        {"delay tolerance contrast", criterion_7},
        {"bandwidth invariance", criterion_8},
        {"gain-schedule insensitivity", criterion_9},
        {"deterministic reruns", criterion_10},
    };
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    bool all_pass = true;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const int idx = static_cast<int>(i) + 1;
        if (only != 0 && only != idx) continue;
        Check c;
        try {
            c = table[i].second();
        } catch (const std::exception& e) {
            c.pass = false;
            c.note(std::string("exception: ") + e.what());
        }
        std::printf("criterion %2d %-34s %s%s%s\n", idx, table[i].first,
                    c.pass ? "PASS" : "FAIL", c.detail.empty() ? "" : " -- ",
                    c.detail.c_str());
        all_pass = all_pass && c.pass;
    }
    return all_pass ? 0 : 1;
}
