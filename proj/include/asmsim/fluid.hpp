#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace asmsim {

// Continuous-model parameter bundle. All quantities must share one consistent
// rate unit; the simulator-facing constructors use packets and packets/s.
// State: x1 = q - q0, x2 = N*r - C. Dynamics in a fixed branch:
//   dx1/dt = x2
//   dx2/dt = -(N*a) x1 - (N*b/(p*C)) x2
// i.e. the x-coefficient carries the explicit N and the damping term is
// N*b/(pC).
struct FluidSystem {
    double sources = 1;      // N
    double capacity = 1;     // C, rate units
    double sample_p = 1;     // p
    double weight = 1;       // w
    double q0 = 0;           // target queue, packets
    double a_plus = 0;
    double a_minus = 0;
    double b_plus = 0;
    double b_minus = 0;
    double tau = 0;          // feedback delay, seconds
    double x1 = 0;
    double x2 = 0;
};

enum class FluidBranch : std::uint8_t { Plus, Minus };

struct SlidingCondition {
    bool holds = false;
    double lhs_minus = 0;
    double lhs_plus = 0;
};

// Existence test for the sliding motion on F_b = 0:
//   (w^2 N / p^2 C^2) a-  -  (w N / p^2 C^2) b-  + 1 < 0
//   (w^2 N / p^2 C^2) a+  -  (w N / p^2 C^2) b+  + 1 > 0
inline SlidingCondition sliding_condition(const FluidSystem& s) {
    const double pc2 = s.sample_p * s.sample_p * s.capacity * s.capacity;
    const double ka = s.weight * s.weight * s.sources / pc2;
    const double kb = s.weight * s.sources / pc2;
    SlidingCondition r;
    r.lhs_minus = ka * s.a_minus - kb * s.b_minus + 1.0;
    r.lhs_plus = ka * s.a_plus - kb * s.b_plus + 1.0;
    r.holds = (r.lhs_minus < 0.0) && (r.lhs_plus > 0.0);
    return r;
}

// Roots of lambda^2 + (N*b/(pC)) lambda + N*a = 0 for the selected branch.
inline std::pair<std::complex<double>, std::complex<double>>
eigenvalues(const FluidSystem& s, FluidBranch branch) {
    const double a = (branch == FluidBranch::Plus) ? s.a_plus : s.a_minus;
    const double b = (branch == FluidBranch::Plus) ? s.b_plus : s.b_minus;
    const double damping = s.sources * b / (s.sample_p * s.capacity);
    const double alpha_eff = s.sources * a;
    const std::complex<double> disc =
        std::sqrt(std::complex<double>(damping * damping / 4.0 - alpha_eff, 0.0));
    const std::complex<double> mid(-damping / 2.0, 0.0);
    return {mid + disc, mid - disc};
}

enum class TrajectoryKind : std::uint8_t { Spiral, Parabola };

struct TrajectoryClass {
    TrajectoryKind kind = TrajectoryKind::Spiral;
    // Parabola asymptote slopes: sigma: x2 + lambda1*x1 = 0, omega: x2 + lambda2*x1 = 0.
    double lambda1 = 0;
    double lambda2 = 0;
    bool boundary = false; // zero real part (spiral) or a zero root (parabola)
};

// Region sign is sign(Q_f * F_b): positive regions run the plus branch and
// must look spiral; negative regions run the minus branch and must look like
// a parabola with two real non-positive roots.
inline TrajectoryClass classify_trajectory(const FluidSystem& s, int region_sign) {
    const SlidingCondition sc = sliding_condition(s);
    if (!sc.holds)
        throw std::domain_error("classify_trajectory: sliding condition does not hold");
    if (region_sign == 0)
        throw std::invalid_argument("classify_trajectory: region sign must be nonzero");

    const FluidBranch br = region_sign > 0 ? FluidBranch::Plus : FluidBranch::Minus;
    const auto [l1, l2] = eigenvalues(s, br);
    TrajectoryClass tc;
    if (region_sign > 0) {
        if (std::abs(l1.imag()) == 0.0)
            throw std::domain_error("classify_trajectory: plus branch has real roots");
        if (l1.real() > 0.0)
            throw std::domain_error("classify_trajectory: plus branch is unstable");
        tc.kind = TrajectoryKind::Spiral;
        tc.lambda1 = l1.real();
        tc.lambda2 = l2.real();
        tc.boundary = (l1.real() == 0.0);
    } else {
        if (std::abs(l1.imag()) != 0.0)
            throw std::domain_error("classify_trajectory: minus branch has complex roots");
        double r1 = l1.real(), r2 = l2.real();
        if (r1 > 0.0 || r2 > 0.0)
            throw std::domain_error("classify_trajectory: minus branch has a positive root");
        if (std::abs(r1) > std::abs(r2)) std::swap(r1, r2);
        tc.kind = TrajectoryKind::Parabola;
        tc.lambda1 = r1;
        tc.lambda2 = r2;
        tc.boundary = (r1 == 0.0);
    }
    return tc;
}

struct FluidSample {
    double t = 0;
    double x1 = 0;
    double x2 = 0;
    FluidBranch branch = FluidBranch::Plus;
};

using Trajectory = std::vector<FluidSample>;

struct FluidDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double fluid_fb(const FluidSystem& s, double x1, double x2) {
    return -x1 - s.weight / (s.sample_p * s.capacity) * x2;
}

inline FluidBranch fluid_branch_at(const FluidSystem& s, double x1, double x2) {
    // Tie (product exactly zero) takes the plus pair, mirroring the RP rule.
    return (x1 * fluid_fb(s, x1, x2) < 0.0) ? FluidBranch::Minus : FluidBranch::Plus;
}

// Fixed-step RK4 over the switched system. The branch is re-selected once per
// step from the tau-delayed state (linear interpolation into the stored
// history, constant pre-history x(t<0) = x(0)) and held across the substeps.
// `frozen` pins a branch for oracle comparisons against the linear solution.
inline Trajectory integrate_fluid(const FluidSystem& s, double t_end, double dt,
                                  std::optional<FluidBranch> frozen = std::nullopt) {
    if (dt <= 0) throw std::invalid_argument("integrate_fluid: dt must be positive");
    if (s.tau > 0 && dt > s.tau / 10.0)
        throw std::invalid_argument("integrate_fluid: dt must be at most tau/10");

    const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt));
    Trajectory out;
    out.reserve(steps + 1);

    std::vector<double> h1(steps + 1), h2(steps + 1);
    h1[0] = s.x1;
    h2[0] = s.x2;

    const double init_norm = std::max(1.0, std::hypot(s.x1, s.x2));
    auto delayed = [&](std::size_t n) -> std::pair<double, double> {
        if (s.tau <= 0) return {h1[n], h2[n]};
        const double td = static_cast<double>(n) * dt - s.tau;
        if (td <= 0) return {h1[0], h2[0]};
        const double fidx = td / dt;
        const auto lo = static_cast<std::size_t>(fidx);
        const double frac = fidx - static_cast<double>(lo);
        const std::size_t hi = std::min(lo + 1, n);
        return {h1[lo] + frac * (h1[hi] - h1[lo]), h2[lo] + frac * (h2[hi] - h2[lo])};
    };

    double x1 = s.x1, x2 = s.x2;
    out.push_back({0.0, x1, x2,
                   frozen.value_or(fluid_branch_at(s, x1, x2))});

    for (std::size_t n = 0; n < steps; ++n) {
        FluidBranch br;
        if (frozen) {
            br = *frozen;
        } else {
            const auto [d1, d2] = delayed(n);
            br = fluid_branch_at(s, d1, d2);
        }
        const double a = (br == FluidBranch::Plus) ? s.a_plus : s.a_minus;
        const double b = (br == FluidBranch::Plus) ? s.b_plus : s.b_minus;
        const double alpha_eff = s.sources * a;
        const double damping = s.sources * b / (s.sample_p * s.capacity);

        auto f1 = [](double, double v2) { return v2; };
        auto f2 = [&](double v1, double v2) { return -alpha_eff * v1 - damping * v2; };

        const double k1a = f1(x1, x2), k1b = f2(x1, x2);
        const double k2a = f1(x1 + 0.5 * dt * k1a, x2 + 0.5 * dt * k1b);
        const double k2b = f2(x1 + 0.5 * dt * k1a, x2 + 0.5 * dt * k1b);
        const double k3a = f1(x1 + 0.5 * dt * k2a, x2 + 0.5 * dt * k2b);
        const double k3b = f2(x1 + 0.5 * dt * k2a, x2 + 0.5 * dt * k2b);
        const double k4a = f1(x1 + dt * k3a, x2 + dt * k3b);
        const double k4b = f2(x1 + dt * k3a, x2 + dt * k3b);
        x1 += dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
        x2 += dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);

        if (std::hypot(x1, x2) > 1e9 * init_norm)
            throw FluidDivergence("integrate_fluid: state exceeded 1e9 x initial norm at t=" +
                                  std::to_string((n + 1) * dt));
        h1[n + 1] = x1;
        h2[n + 1] = x2;
        out.push_back({static_cast<double>(n + 1) * dt, x1, x2, br});
    }
    return out;
}

// Queue trajectory inside the sliding motion: exponential decay to the
// target with time constant w/(pC).
inline double sliding_queue_solution(double q_init, const FluidSystem& s, double t) {
    return s.q0 + (q_init - s.q0) * std::exp(-s.sample_p * s.capacity * t / s.weight);
}

} // namespace asmsim
