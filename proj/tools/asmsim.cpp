// Command-line front end: run scenarios, reproduce the experiment suites,
// and run the continuous-model analyses.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime divergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asmsim/delay_robustness.hpp"
#include "asmsim/fluid.hpp"
#include "asmsim/network.hpp"
#include "asmsim/qcn_stability.hpp"
#include "asmsim/scenario.hpp"
#include "asmsim/suites.hpp"

namespace fs = std::filesystem;
using namespace asmsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

// --override section.key=value, repeatable
void apply_overrides(ScenarioSpec& spec, const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        const auto dot = ov.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override must look like section.key=value: " + ov);
        apply_scalar_key(spec, ov.substr(0, dot), ov.substr(dot + 1, eq - dot - 1),
                         ov.substr(eq + 1));
    }
    validate_scenario(spec);
}

ScenarioSpec load_with_overrides(const std::string& path, const std::vector<std::string>& ovs,
                                 std::optional<std::uint64_t> seed,
                                 std::optional<std::string> algorithm) {
    ScenarioSpec spec = load_scenario(path);
    if (algorithm) {
        if (*algorithm == "asm") spec.algorithm = Algorithm::Asm;
        else if (*algorithm == "qcn") spec.algorithm = Algorithm::Qcn;
        else throw ConfigError("--algorithm must be asm or qcn");
    }
    if (seed) spec.seed = *seed;
    apply_overrides(spec, ovs);
    return spec;
}

void report_sliding(const ScenarioSpec& spec, std::ostream& os) {
    double cmin = spec.links.front().capacity_bps;
    for (const auto& l : spec.links) cmin = std::min(cmin, l.capacity_bps);
    const double n = static_cast<double>(spec.flows.size());
    os << "regime,n,capacity_bps,sampling_p,weight,lhs_minus,lhs_plus,holds\n";
    for (auto regime : {AsmRegime::Approach, AsmRegime::Sliding}) {
        const FluidSystem f = fluid_from_scenario(spec, cmin, n, regime);
        const SlidingCondition sc = sliding_condition(f);
        os << (regime == AsmRegime::Approach ? "approach" : "sliding") << ',' << n << ','
           << format_g(cmin) << ',' << format_g(spec.sampling_p) << ',' << format_g(spec.weight)
           << ',' << format_g(sc.lhs_minus) << ',' << format_g(sc.lhs_plus) << ','
           << (sc.holds ? 1 : 0) << '\n';
    }
}

int run_scenario(const ScenarioSpec& spec, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    Network net(spec);
    const SimSummary sum = net.run();
    {
        std::ofstream tf(out_dir / "trace.csv", std::ios::binary);
        write_trace_csv(tf, net.trace(), net.n_ports(), net.n_flows());
    }
    {
        std::ofstream mf(out_dir / "metrics.txt", std::ios::binary);
        write_metrics(mf, net.metrics(net.default_band()));
    }
    std::cerr << "events=" << sum.events_dispatched << " simulated_s=" << to_seconds(sum.clock_end)
              << " wall_ms=" << sum.wall_ms << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"asmsim: link-layer congestion control simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = "out";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> algorithm;

    auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", scenario_path, "scenario config file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "override the scenario seed");
        cmd->add_option("--algorithm", algorithm, "override the algorithm (asm|qcn)");
        cmd->add_option("--override", overrides, "section.key=value override (repeatable)");
    };

    auto* cmd_run = app.add_subcommand("run", "run one scenario, write trace and metrics");
    add_common(cmd_run, true);

    auto* cmd_validate = app.add_subcommand("validate", "parse and validate a scenario");
    add_common(cmd_validate, true);

    auto* cmd_suite = app.add_subcommand("suite", "run a canned experiment suite");
    std::string suite_name;
    cmd_suite
        ->add_option("name", suite_name,
                     "sliding | small-queue | convergence | param-sweep | bandwidth-sweep | "
                     "delay-sweep | parking-lot")
        ->required();
    cmd_suite->add_option("--out", out_dir, "output directory");
    std::uint64_t suite_seed = 1;
    cmd_suite->add_option("--seed", suite_seed, "master seed");

    auto* cmd_analyze = app.add_subcommand("analyze", "continuous-model analyses, CSV output");
    std::string kind;
    cmd_analyze
        ->add_option("kind", kind, "sliding-check | eigen | qcn-tau | h0 | fluid-sim")
        ->required();
    std::string params_path = "scenarios/qcn_fluid_reference.cfg";
    std::vector<double> capacities;
    std::string variant = "a3";
    double fn = 1, fc = 1, fp = 1, fw = 2, fq0 = 0;
    double fap = 0, fam = 0, fbp = 0, fbm = 0;
    double ftau = 0, fx1 = 0, fx2 = 0, ft_end = 10, fdt = 1e-3, fe1 = 0;
    std::string frozen, analyze_out;
    cmd_analyze->add_option("--scenario", scenario_path, "scenario file (sliding-check)");
    cmd_analyze->add_option("--params", params_path, "reference parameter file (qcn-tau)");
    cmd_analyze->add_option("--capacity", capacities, "link capacity in bits/s (repeatable)");
    cmd_analyze->add_option("--variant", variant, "omega* radical variant: a3 | a4 (qcn-tau)");
    cmd_analyze->add_option("--sources", fn, "N");
    cmd_analyze->add_option("--fluid-capacity", fc, "C in consistent rate units");
    cmd_analyze->add_option("--sampling-p", fp, "p");
    cmd_analyze->add_option("--weight", fw, "w");
    cmd_analyze->add_option("--q0", fq0, "target queue (packets)");
    cmd_analyze->add_option("--a-plus", fap, "fluid gain a+");
    cmd_analyze->add_option("--a-minus", fam, "fluid gain a-");
    cmd_analyze->add_option("--b-plus", fbp, "fluid gain b+");
    cmd_analyze->add_option("--b-minus", fbm, "fluid gain b-");
    cmd_analyze->add_option("--tau", ftau, "feedback delay (s)");
    cmd_analyze->add_option("--x1", fx1, "initial queue offset");
    cmd_analyze->add_option("--x2", fx2, "initial rate offset");
    cmd_analyze->add_option("--t-end", ft_end, "integration horizon (s)");
    cmd_analyze->add_option("--dt", fdt, "integration step (s)");
    cmd_analyze->add_option("--e1", fe1, "disturbance magnitude (h0)");
    cmd_analyze->add_option("--frozen", frozen, "freeze one branch: plus | minus (fluid-sim)");
    cmd_analyze->add_option("--csv-out", analyze_out, "write CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            return run_scenario(load_with_overrides(scenario_path, overrides, seed, algorithm),
                                out_dir);
        }
        if (cmd_validate->parsed()) {
            const ScenarioSpec spec =
                load_with_overrides(scenario_path, overrides, seed, algorithm);
            std::cout << "ok: " << spec.nodes.size() << " nodes, " << spec.links.size()
                      << " links, " << spec.flows.size() << " flows\n";
            report_sliding(spec, std::cout);
            return kExitOk;
        }
        if (cmd_suite->parsed()) {
            run_suite(suite_name, suite_seed, out_dir);
            std::cout << "suite " << suite_name << " written to " << out_dir << "/" << suite_name
                      << "\n";
            return kExitOk;
        }
        // analyze
        std::ofstream file_out;
        std::ostream* osp = &std::cout;
        if (!analyze_out.empty()) {
            file_out.open(analyze_out, std::ios::binary);
            osp = &file_out;
        }
        std::ostream& os = *osp;

        FluidSystem fsys;
        fsys.sources = fn;
        fsys.capacity = fc;
        fsys.sample_p = fp;
        fsys.weight = fw;
        fsys.q0 = fq0;
        fsys.a_plus = fap;
        fsys.a_minus = fam;
        fsys.b_plus = fbp;
        fsys.b_minus = fbm;
        fsys.tau = ftau;
        fsys.x1 = fx1;
        fsys.x2 = fx2;

        if (kind == "sliding-check") {
            if (scenario_path.empty()) {
                const SlidingCondition sc = sliding_condition(fsys);
                os << "lhs_minus,lhs_plus,holds\n"
                   << format_g(sc.lhs_minus) << ',' << format_g(sc.lhs_plus) << ','
                   << (sc.holds ? 1 : 0) << '\n';
            } else {
                ScenarioSpec spec = load_with_overrides(scenario_path, overrides, seed, algorithm);
                report_sliding(spec, os);
            }
        } else if (kind == "eigen") {
            os << "branch,re1,im1,re2,im2\n";
            for (auto br : {FluidBranch::Plus, FluidBranch::Minus}) {
                const auto [l1, l2] = eigenvalues(fsys, br);
                os << (br == FluidBranch::Plus ? "plus" : "minus") << ',' << format_g(l1.real())
                   << ',' << format_g(l1.imag()) << ',' << format_g(l2.real()) << ','
                   << format_g(l2.imag()) << '\n';
            }
        } else if (kind == "qcn-tau") {
            if (capacities.empty()) capacities = {10e9};
            const QcnReferenceParams ref = load_qcn_reference(params_path);
            const OmegaStarVariant v =
                variant == "a4" ? OmegaStarVariant::A4Cubed : OmegaStarVariant::A3Fourth;
            os << "capacity_bps,tau_min_s\n";
            for (double c : capacities) {
                const QcnStabilityParams q = make_qcn_stability(c, ref);
                os << format_g(c) << ',' << format_g(qcn_delay_lower_bound(q, v)) << '\n';
            }
        } else if (kind == "h0") {
            os << "e1,width_pkts\n" << format_g(fe1) << ',' << format_g(h0_width(fsys, fe1)) << '\n';
        } else if (kind == "fluid-sim") {
            std::optional<FluidBranch> fz;
            if (frozen == "plus") fz = FluidBranch::Plus;
            else if (frozen == "minus") fz = FluidBranch::Minus;
            else if (!frozen.empty()) throw ConfigError("--frozen must be plus or minus");
            const Trajectory tr = integrate_fluid(fsys, ft_end, fdt, fz);
            os << "t,x1,x2,fb,branch,slope_k\n";
            for (std::size_t i = 0; i < tr.size(); ++i) {
                const auto& p = tr[i];
                os << format_g(p.t) << ',' << format_g(p.x1) << ',' << format_g(p.x2) << ','
                   << format_g(fluid_fb(fsys, p.x1, p.x2)) << ','
                   << (p.branch == FluidBranch::Plus ? "plus" : "minus") << ',';
                // Q/R tangent dA/dq between consecutive samples
                if (i > 0 && p.x1 != tr[i - 1].x1)
                    os << format_g((p.x2 - tr[i - 1].x2) / (p.x1 - tr[i - 1].x1));
                os << '\n';
            }
        } else {
            throw ConfigError("unknown analyze kind: " + kind);
        }
        return kExitOk;
    } catch (const FluidDivergence& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
