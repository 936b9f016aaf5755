#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "asmsim/asm_rp.hpp"
#include "asmsim/fluid.hpp"
#include "asmsim/qcn_rp.hpp"
#include "asmsim/time.hpp"

namespace asmsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Algorithm : std::uint8_t { Asm, Qcn };

struct NodeSpec {
    std::string name;
    bool is_switch = false;
    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct LinkSpec {
    std::string node_a;
    std::string node_b;
    double capacity_bps = 0;
    TimeNs delay_ns = 0;
    friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

struct FlowSpec {
    std::string source;
    std::string sink;
    TimeNs start_ns = 0;
    std::optional<TimeNs> stop_ns;
    // Randomized start: uniform in [lo, hi] resolved from the scenario seed.
    std::optional<std::pair<TimeNs, TimeNs>> start_window_ns;
    std::optional<TimeNs> duration_ns;
    double rate_bps = 0;
    std::uint32_t packet_bytes = 1500;
    friend bool operator==(const FlowSpec&, const FlowSpec&) = default;
};

// ASM gain schedule expressed as per-adjustment caps (fractions of link
// capacity at full-scale feedback), order: a+A a-A b+A b-A a+S a-S b+S b-S.
struct AsmConfig {
    std::array<double, 8> caps{1.0 / 8, 1.0 / 64, 1.0 / 16, 1.0 / 2,
                               1.0 / 16, 1.0 / 128, 1.0 / 32, 1.0 / 4};
    double bound_state = 16;
    double bound_fb = 64;
    double r_min_bps = 1e6;
    friend bool operator==(const AsmConfig&, const AsmConfig&) = default;
};

struct QcnConfig {
    double gd = 1.0 / 126.0;
    std::uint64_t bc_limit_bytes = 150 * 1000;
    std::uint32_t fr_cycles = 5;
    double r_ai_bps = 5e6;
    double r_hai_bps = 50e6;
    TimeNs timer_period_ns = 0; // 0 = time to send bc_limit at 10% of NIC speed
    double r_min_bps = 1e6;
    bool enable_trr = false;
    bool enable_efr = false;
    friend bool operator==(const QcnConfig&, const QcnConfig&) = default;
};

struct ScenarioSpec {
    Algorithm algorithm = Algorithm::Asm;
    std::uint64_t seed = 1;
    TimeNs t_end_ns = 0;
    double q0_packets = 64;
    std::uint64_t buffer_bytes = 128 * 1024;
    double weight = 32;
    double sampling_p = 0.01;
    std::uint32_t packet_bytes = 1500; // queue accounting unit and default MTU
    TimeNs trace_period_ns = 0;        // 0 = auto from fastest link
    std::string monitor = "auto";      // "auto" or a cpid number
    AsmConfig asm_cfg;
    QcnConfig qcn_cfg;
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::vector<FlowSpec> flows;

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;

    const NodeSpec* find_node(const std::string& name) const {
        for (const auto& n : nodes)
            if (n.name == name) return &n;
        return nullptr;
    }
    // Capacity of the (single) link attached to a host.
    double host_link_capacity(const std::string& host) const {
        for (const auto& l : links)
            if (l.node_a == host || l.node_b == host) return l.capacity_bps;
        return 0;
    }
};

inline TimeNs auto_trace_period(const ScenarioSpec& s) {
    double cmax = 0;
    for (const auto& l : s.links) cmax = std::max(cmax, l.capacity_bps);
    return cmax > 10e9 ? 10'000 : 100'000; // 10 us above 10 Gbps, else 100 us
}

inline void validate_scenario(const ScenarioSpec& s) {
    if (s.nodes.empty()) throw ConfigError("validation: no nodes declared");
    if (s.links.empty()) throw ConfigError("validation: no links declared");
    if (s.flows.empty()) throw ConfigError("validation: no flows declared");
    if (s.sampling_p <= 0 || s.sampling_p > 1)
        throw ConfigError("validation: sampling_p must be in (0, 1]");
    if (s.weight <= 0) throw ConfigError("validation: weight must be positive");
    if (s.t_end_ns <= 0) throw ConfigError("validation: t_end_ns must be positive");
    if (s.q0_packets * s.packet_bytes >= static_cast<double>(s.buffer_bytes))
        throw ConfigError("validation: q0_packets * packet_bytes must be below buffer_bytes");
    for (const auto& c : s.asm_cfg.caps)
        if (c <= 0) throw ConfigError("validation: asm caps must be positive");
    for (const auto& l : s.links) {
        if (l.capacity_bps <= 0)
            throw ConfigError("validation: link capacity must be positive (" + l.node_a + "-" +
                              l.node_b + ")");
        if (l.delay_ns < 0)
            throw ConfigError("validation: link delay must be non-negative");
        if (!s.find_node(l.node_a) || !s.find_node(l.node_b))
            throw ConfigError("validation: link references unknown node (" + l.node_a + "-" +
                              l.node_b + ")");
    }
    for (const auto& f : s.flows) {
        const NodeSpec* src = s.find_node(f.source);
        const NodeSpec* dst = s.find_node(f.sink);
        if (!src || !dst)
            throw ConfigError("validation: flow references unknown node (" + f.source + "->" +
                              f.sink + ")");
        if (src->is_switch || dst->is_switch)
            throw ConfigError("validation: flow endpoints must be hosts (" + f.source + "->" +
                              f.sink + ")");
        if (f.rate_bps <= 0) throw ConfigError("validation: flow rate must be positive");
        if (f.rate_bps > s.host_link_capacity(f.source) + 1e-9)
            throw ConfigError("validation: flow rate exceeds source NIC capacity (" + f.source +
                              ")");
        if (f.stop_ns && *f.stop_ns <= f.start_ns)
            throw ConfigError("validation: flow stop time must follow start time (" + f.source +
                              ")");
        if (f.start_window_ns && f.start_window_ns->second < f.start_window_ns->first)
            throw ConfigError("validation: flow start window is inverted (" + f.source + ")");
        if (f.packet_bytes == 0) throw ConfigError("validation: packet_bytes must be positive");
    }
}

inline AsmParams asm_params_for(const ScenarioSpec& s, double nic_capacity_bps) {
    AsmParams p;
    coefficients_from_caps(p, s.asm_cfg.caps, nic_capacity_bps);
    p.bound_fb = s.asm_cfg.bound_fb;
    p.bound_state = s.asm_cfg.bound_state;
    p.weight = s.weight;
    p.sample_p = s.sampling_p;
    const double max_pkts = static_cast<double>(s.buffer_bytes) / s.packet_bytes;
    p.quant_scale = std::max(1.0, std::ceil(max_pkts / 127.0));
    return p;
}

inline QcnParams qcn_params_for(const ScenarioSpec& s, double nic_capacity_bps) {
    QcnParams p;
    p.gd = s.qcn_cfg.gd;
    p.bc_limit = s.qcn_cfg.bc_limit_bytes;
    p.fr_cycles = s.qcn_cfg.fr_cycles;
    p.r_ai_bps = s.qcn_cfg.r_ai_bps;
    p.r_hai_bps = s.qcn_cfg.r_hai_bps;
    p.r_min_bps = s.qcn_cfg.r_min_bps;
    p.enable_trr = s.qcn_cfg.enable_trr;
    p.enable_efr = s.qcn_cfg.enable_efr;
    p.timer_period_ns = s.qcn_cfg.timer_period_ns != 0
                            ? s.qcn_cfg.timer_period_ns
                            : tx_time_ns(static_cast<std::int64_t>(p.bc_limit) * 8,
                                         0.1 * nic_capacity_bps);
    return p;
}

// Continuous-model view of a scenario's ASM gain schedule. Works in packet
// units; the per-feedback gains become fluid gains through the per-source
// feedback event rate p*C/N (each source's packets are sampled with
// probability p at the shared bottleneck).
inline FluidSystem fluid_from_scenario(const ScenarioSpec& s, double bottleneck_bps,
                                       double n_sources, AsmRegime regime) {
    const double bits = 8.0 * s.packet_bytes;
    FluidSystem f;
    f.sources = n_sources;
    f.capacity = bottleneck_bps / bits; // packets/s
    f.sample_p = s.sampling_p;
    f.weight = s.weight;
    f.q0 = s.q0_packets;
    f.tau = 0;
    AsmParams p = asm_params_for(s, bottleneck_bps);
    const AsmCoeffs& c = (regime == AsmRegime::Approach) ? p.approach : p.sliding;
    const double event_rate = s.sampling_p * f.capacity / n_sources;
    const double per_unit_to_pkts = 1.0 / bits; // bits/s per unit -> pkts/s per unit
    f.a_plus = event_rate * c.a_plus * per_unit_to_pkts;
    f.a_minus = event_rate * c.a_minus * per_unit_to_pkts;
    f.b_plus = event_rate * c.b_plus * per_unit_to_pkts;
    f.b_minus = event_rate * c.b_minus * per_unit_to_pkts;
    return f;
}

// ---------------------------------------------------------------------------
// Config file format: INI-style sections with key = value lines. Structured
// entries (nodes, links, flows) are one line per item, value holds k=v pairs.

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
    }
}

inline std::int64_t parse_i64(const std::string& v, int line) {
    const double d = parse_double(v, line);
    return static_cast<std::int64_t>(std::llround(d));
}

inline std::map<std::string, std::string> parse_pairs(const std::string& v, int line) {
    std::map<std::string, std::string> out;
    std::istringstream iss(v);
    std::string tok;
    while (iss >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected k=v, got '" + tok + "'");
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

inline std::string need(const std::map<std::string, std::string>& kv, const std::string& key,
                        int line) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw ConfigError("line " + std::to_string(line) + ": missing field '" + key + "'");
    return it->second;
}

} // namespace detail

// Applies one key to a spec; shared between the parser and --override.
inline void apply_scalar_key(ScenarioSpec& s, const std::string& section, const std::string& key,
                             const std::string& value, int line = 0) {
    using detail::parse_double;
    using detail::parse_i64;
    auto bad_key = [&] {
        throw ConfigError("line " + std::to_string(line) + ": unknown key '" + section + "." +
                          key + "'");
    };
    if (section == "scenario") {
        if (key == "algorithm") {
            if (value == "asm") s.algorithm = Algorithm::Asm;
            else if (value == "qcn") s.algorithm = Algorithm::Qcn;
            else throw ConfigError("line " + std::to_string(line) + ": algorithm must be asm|qcn");
        } else if (key == "seed") s.seed = static_cast<std::uint64_t>(parse_i64(value, line));
        else if (key == "t_end_ns") s.t_end_ns = parse_i64(value, line);
        else if (key == "q0_packets") s.q0_packets = parse_double(value, line);
        else if (key == "buffer_bytes") s.buffer_bytes = static_cast<std::uint64_t>(parse_i64(value, line));
        else if (key == "weight") s.weight = parse_double(value, line);
        else if (key == "sampling_p") s.sampling_p = parse_double(value, line);
        else if (key == "packet_bytes") s.packet_bytes = static_cast<std::uint32_t>(parse_i64(value, line));
        else if (key == "trace_period_ns") s.trace_period_ns = parse_i64(value, line);
        else if (key == "monitor") s.monitor = value;
        else bad_key();
    } else if (section == "asm") {
        static const std::array<std::string, 8> cap_keys = {
            "cap_a_plus_A", "cap_a_minus_A", "cap_b_plus_A", "cap_b_minus_A",
            "cap_a_plus_S", "cap_a_minus_S", "cap_b_plus_S", "cap_b_minus_S"};
        for (std::size_t i = 0; i < cap_keys.size(); ++i) {
            if (key == cap_keys[i]) {
                s.asm_cfg.caps[i] = parse_double(value, line);
                return;
            }
        }
        if (key == "bound_state") s.asm_cfg.bound_state = parse_double(value, line);
        else if (key == "bound_fb") s.asm_cfg.bound_fb = parse_double(value, line);
        else if (key == "r_min_bps") s.asm_cfg.r_min_bps = parse_double(value, line);
        else bad_key();
    } else if (section == "qcn") {
        if (key == "gd") s.qcn_cfg.gd = parse_double(value, line);
        else if (key == "bc_limit_bytes") s.qcn_cfg.bc_limit_bytes = static_cast<std::uint64_t>(parse_i64(value, line));
        else if (key == "fr_cycles") s.qcn_cfg.fr_cycles = static_cast<std::uint32_t>(parse_i64(value, line));
        else if (key == "r_ai_bps") s.qcn_cfg.r_ai_bps = parse_double(value, line);
        else if (key == "r_hai_bps") s.qcn_cfg.r_hai_bps = parse_double(value, line);
        else if (key == "timer_period_ns") s.qcn_cfg.timer_period_ns = parse_i64(value, line);
        else if (key == "r_min_bps") s.qcn_cfg.r_min_bps = parse_double(value, line);
        else if (key == "enable_trr") s.qcn_cfg.enable_trr = parse_i64(value, line) != 0;
        else if (key == "enable_efr") s.qcn_cfg.enable_efr = parse_i64(value, line) != 0;
        else bad_key();
    } else {
        throw ConfigError("line " + std::to_string(line) + ": unknown section '" + section + "'");
    }
}

inline ScenarioSpec parse_scenario(std::istream& in) {
    ScenarioSpec s;
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string t = detail::trim(raw);
        if (const auto hash = t.find('#'); hash != std::string::npos)
            t = detail::trim(t.substr(0, hash));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("line " + std::to_string(line) + ": malformed section header");
            section = t.substr(1, t.size() - 2);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line) + ": expected key = value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (section == "nodes") {
            if (value != "host" && value != "switch")
                throw ConfigError("line " + std::to_string(line) + ": node type must be host|switch");
            s.nodes.push_back({key, value == "switch"});
        } else if (section == "links") {
            const auto kv = detail::parse_pairs(value, line);
            LinkSpec l;
            l.node_a = detail::need(kv, "a", line);
            l.node_b = detail::need(kv, "b", line);
            l.capacity_bps = detail::parse_double(detail::need(kv, "capacity_bps", line), line);
            l.delay_ns = detail::parse_i64(detail::need(kv, "delay_ns", line), line);
            s.links.push_back(l);
        } else if (section == "flows") {
            const auto kv = detail::parse_pairs(value, line);
            FlowSpec f;
            f.source = detail::need(kv, "src", line);
            f.sink = detail::need(kv, "dst", line);
            f.rate_bps = detail::parse_double(detail::need(kv, "rate_bps", line), line);
            if (kv.count("start_ns")) f.start_ns = detail::parse_i64(kv.at("start_ns"), line);
            if (kv.count("stop_ns")) f.stop_ns = detail::parse_i64(kv.at("stop_ns"), line);
            if (kv.count("start_window_ns")) {
                const std::string w = kv.at("start_window_ns");
                const auto colon = w.find(':');
                if (colon == std::string::npos)
                    throw ConfigError("line " + std::to_string(line) +
                                      ": start_window_ns must be lo:hi");
                f.start_window_ns = {detail::parse_i64(w.substr(0, colon), line),
                                     detail::parse_i64(w.substr(colon + 1), line)};
            }
            if (kv.count("duration_ns")) f.duration_ns = detail::parse_i64(kv.at("duration_ns"), line);
            if (kv.count("packet_bytes"))
                f.packet_bytes = static_cast<std::uint32_t>(detail::parse_i64(kv.at("packet_bytes"), line));
            else
                f.packet_bytes = s.packet_bytes;
            s.flows.push_back(f);
        } else {
            apply_scalar_key(s, section, key, value, line);
        }
    }
    validate_scenario(s);
    return s;
}

inline ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    return parse_scenario(in);
}

inline std::string serialize_scenario(const ScenarioSpec& s) {
    std::ostringstream o;
    o.precision(17);
    o << "[scenario]\n";
    o << "algorithm = " << (s.algorithm == Algorithm::Asm ? "asm" : "qcn") << "\n";
    o << "seed = " << s.seed << "\n";
    o << "t_end_ns = " << s.t_end_ns << "\n";
    o << "q0_packets = " << s.q0_packets << "\n";
    o << "buffer_bytes = " << s.buffer_bytes << "\n";
    o << "weight = " << s.weight << "\n";
    o << "sampling_p = " << s.sampling_p << "\n";
    o << "packet_bytes = " << s.packet_bytes << "\n";
    o << "trace_period_ns = " << s.trace_period_ns << "\n";
    o << "monitor = " << s.monitor << "\n";
    o << "\n[asm]\n";
    static const std::array<const char*, 8> cap_keys = {
        "cap_a_plus_A", "cap_a_minus_A", "cap_b_plus_A", "cap_b_minus_A",
        "cap_a_plus_S", "cap_a_minus_S", "cap_b_plus_S", "cap_b_minus_S"};
    for (std::size_t i = 0; i < cap_keys.size(); ++i)
        o << cap_keys[i] << " = " << s.asm_cfg.caps[i] << "\n";
    o << "bound_state = " << s.asm_cfg.bound_state << "\n";
    o << "bound_fb = " << s.asm_cfg.bound_fb << "\n";
    o << "r_min_bps = " << s.asm_cfg.r_min_bps << "\n";
    o << "\n[qcn]\n";
    o << "gd = " << s.qcn_cfg.gd << "\n";
    o << "bc_limit_bytes = " << s.qcn_cfg.bc_limit_bytes << "\n";
    o << "fr_cycles = " << s.qcn_cfg.fr_cycles << "\n";
    o << "r_ai_bps = " << s.qcn_cfg.r_ai_bps << "\n";
    o << "r_hai_bps = " << s.qcn_cfg.r_hai_bps << "\n";
    o << "timer_period_ns = " << s.qcn_cfg.timer_period_ns << "\n";
    o << "r_min_bps = " << s.qcn_cfg.r_min_bps << "\n";
    o << "enable_trr = " << (s.qcn_cfg.enable_trr ? 1 : 0) << "\n";
    o << "enable_efr = " << (s.qcn_cfg.enable_efr ? 1 : 0) << "\n";
    o << "\n[nodes]\n";
    for (const auto& n : s.nodes) o << n.name << " = " << (n.is_switch ? "switch" : "host") << "\n";
    o << "\n[links]\n";
    int li = 0;
    for (const auto& l : s.links)
        o << "l" << li++ << " = a=" << l.node_a << " b=" << l.node_b
          << " capacity_bps=" << l.capacity_bps << " delay_ns=" << l.delay_ns << "\n";
    o << "\n[flows]\n";
    int fi = 0;
    for (const auto& f : s.flows) {
        o << "f" << fi++ << " = src=" << f.source << " dst=" << f.sink
          << " rate_bps=" << f.rate_bps << " packet_bytes=" << f.packet_bytes
          << " start_ns=" << f.start_ns;
        if (f.stop_ns) o << " stop_ns=" << *f.stop_ns;
        if (f.start_window_ns)
            o << " start_window_ns=" << f.start_window_ns->first << ":"
              << f.start_window_ns->second;
        if (f.duration_ns) o << " duration_ns=" << *f.duration_ns;
        o << "\n";
    }
    return o.str();
}

// n sources -> one switch -> one sink, all links identical.
inline ScenarioSpec build_dumbbell(int n_sources, double capacity_bps, double delay_s) {
    if (n_sources < 1) throw ConfigError("build_dumbbell: need at least one source");
    ScenarioSpec s;
    s.t_end_ns = 500'000'000;
    s.nodes.push_back({"sw0", true});
    s.nodes.push_back({"sink0", false});
    const TimeNs delay_ns = seconds_to_ns(delay_s);
    s.links.push_back({"sw0", "sink0", capacity_bps, delay_ns});
    for (int i = 0; i < n_sources; ++i) {
        const std::string host = "src" + std::to_string(i);
        s.nodes.push_back({host, false});
        s.links.push_back({host, "sw0", capacity_bps, delay_ns});
        FlowSpec f;
        f.source = host;
        f.sink = "sink0";
        f.start_ns = 0;
        f.rate_bps = capacity_bps / 2.0;
        f.packet_bytes = s.packet_bytes;
        s.flows.push_back(f);
    }
    return s;
}

// Dumbbell over a chain of `n_switches` (sources enter at the first switch,
// the sink hangs off the last); used by the delay experiments where the
// round-trip spans several links.
inline ScenarioSpec build_chain_dumbbell(int n_sources, int n_switches, double capacity_bps,
                                         double delay_s) {
    if (n_sources < 1 || n_switches < 1)
        throw ConfigError("build_chain_dumbbell: need sources and switches");
    ScenarioSpec s;
    s.t_end_ns = 500'000'000;
    const TimeNs delay_ns = seconds_to_ns(delay_s);
    for (int i = 0; i < n_switches; ++i) s.nodes.push_back({"sw" + std::to_string(i), true});
    s.nodes.push_back({"sink0", false});
    for (int i = 0; i + 1 < n_switches; ++i)
        s.links.push_back({"sw" + std::to_string(i), "sw" + std::to_string(i + 1), capacity_bps,
                           delay_ns});
    s.links.push_back({"sw" + std::to_string(n_switches - 1), "sink0", capacity_bps, delay_ns});
    for (int i = 0; i < n_sources; ++i) {
        const std::string host = "src" + std::to_string(i);
        s.nodes.push_back({host, false});
        s.links.push_back({host, "sw0", capacity_bps, delay_ns});
        FlowSpec f;
        f.source = host;
        f.sink = "sink0";
        f.rate_bps = capacity_bps / 2.0;
        f.packet_bytes = s.packet_bytes;
        s.flows.push_back(f);
    }
    return s;
}

} // namespace asmsim
