#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fft.hpp"
#include "field.hpp"
#include "heat.hpp"
#include "nonlinearity.hpp"
#include "norms.hpp"

namespace asymptolab {

/// One Gaussian component mass · G_width(x - center) of the initial data.
struct GaussianBump {
    double mass = 1.0;
    std::array<double, 2> center{0.0, 0.0};
    double width = 1.0;  ///< heat time of the Gaussian (variance / 2)
};

/// Initial data: a Gaussian mixture, or explicit samples when `samples` is set.
struct InitialData {
    std::vector<GaussianBump> bumps;
    std::optional<Field> samples;

    static InitialData gaussian(double mass, double width, std::array<double, 2> center = {0.0, 0.0}) {
        return InitialData{{GaussianBump{mass, center, width}}, std::nullopt};
    }

    static InitialData explicit_samples(Field f) { return InitialData{{}, std::move(f)}; }

    /// Band-limited periodic sampling (exact mass on the grid).
    Field sample(const GridSpec& g) const {
        if (samples) {
            if (!(samples->grid() == g)) throw GridMismatch("InitialData: samples live on a different grid");
            return *samples;
        }
        Spectrum s(g);
        for (const auto& b : bumps) {
            if (!(b.width > 0.0)) throw InvalidArgument("InitialData: bump width must be positive");
            const auto base = gaussian_spectrum(g, b.width, b.mass);
            for (std::size_t i = 0; i < s.size(); ++i) {
                const auto k = mode_wavevector(g, i);
                const double ph = -(k[0] * b.center[0] + k[1] * b.center[1]);
                s[i] += base[i] * Complex(std::cos(ph), std::sin(ph));
            }
        }
        return inverse(s);
    }
};

/// Adaptive step parameters: Δt <= max(dt_min, growth · t), further limited
/// by the embedded error controller with relative tolerance `rtol`.
struct StepPolicy {
    double rtol = 1e-9;
    double dt_initial = 1e-4;
    double dt_min = 1e-3;
    double growth = 0.05;
    std::size_t max_steps = 2'000'000;
};

struct SolverConfig {
    GridSpec grid;
    Nonlinearity nonlinearity = Nonlinearity::abs_power_signed(2.0);
    std::array<double, 2> a{1.0, 0.0};
    InitialData initial_data;
    double t_end = 1.0;
    std::vector<double> sample_times;
    StepPolicy step;
    bool self_test = false;          ///< permits a = 0
    bool dealias = false;            ///< 2/3-rule filter, integer p only
    double box_threshold = 1e-3;     ///< boundary shell / maximum ratio tolerated
};

struct StepRecord {
    double t;
    double dt;
    double max_norm;
    double mass_drift;
};

/// Solution samples at the requested times.
struct Trajectory {
    GridSpec grid;
    std::vector<double> times;
    std::vector<Field> samples;
    Field initial;
    double conserved_mass = 0.0;
    std::vector<StepRecord> steps;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    bool empty() const noexcept { return times.empty(); }

    /// Sample at time t (exact match within relative 1e-12).
    const Field& at(double t) const {
        const auto it = std::lower_bound(times.begin(), times.end(), t * (1.0 - 1e-12));
        if (it == times.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, t)) {
            throw InvalidArgument("Trajectory: no sample at t=" + std::to_string(t));
        }
        return samples[static_cast<std::size_t>(it - times.begin())];
    }

    bool has(double t) const noexcept {
        const auto it = std::lower_bound(times.begin(), times.end(), t * (1.0 - 1e-12));
        return it != times.end() && std::abs(*it - t) <= 1e-12 * std::max(1.0, t);
    }

    double max_mass_drift() const {
        double m = 0.0;
        for (const auto& s : samples) m = std::max(m, std::abs(mass(s) - conserved_mass));
        return m;
    }
};

namespace detail {

struct DormandPrince {
    static constexpr std::array<double, 7> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static constexpr std::array<double, 7> b{35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0};
    static constexpr std::array<double, 7> bhat{5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640,
                                                -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

class FluxOperator {
public:
    explicit FluxOperator(const SolverConfig& cfg) : cfg_(cfg) {
        const auto& g = cfg.grid;
        symbol_.resize(Spectrum::mode_count(g));
        const double nyq = g.nyquist();
        for (std::size_t i = 0; i < symbol_.size(); ++i) {
            auto k = mode_wavevector(g, i);
            bool keep = true;
            for (auto& kj : k) {
                if (std::abs(std::abs(kj) - nyq) < 1e-9 * nyq) kj = 0.0;
                if (cfg.dealias && std::abs(kj) > (2.0 / 3.0) * nyq) keep = false;
            }
            symbol_[i] = keep ? Complex(0.0, cfg.a[0] * k[0] + cfg.a[1] * k[1]) : Complex(0.0, 0.0);
        }
    }

    /// (i a·ξ) F[f(u)] for u with spectrum `u_hat`.
    Spectrum operator()(const Spectrum& u_hat) const {
        auto fu = cfg_.nonlinearity.apply(inverse(u_hat));
        auto s = forward(fu);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] *= symbol_[i];
        return s;
    }

private:
    const SolverConfig& cfg_;
    std::vector<Complex> symbol_;
};

inline double spectral_norm(const Spectrum& s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += std::norm(s[i]);
    return std::sqrt(acc);
}

inline void validate(const SolverConfig& cfg) {
    if (cfg.a[0] == 0.0 && cfg.a[1] == 0.0 && !cfg.self_test) {
        throw InvalidArgument("solve: convection vector a = 0 is only allowed in self-test mode");
    }
    if (cfg.grid.dim() == 1 && cfg.a[1] != 0.0) throw InvalidArgument("solve: a has a second component on a 1D grid");
    if (!(cfg.t_end > 0.0)) throw InvalidArgument("solve: t_end must be positive");
    double prev = 0.0;
    for (double t : cfg.sample_times) {
        if (!(t > prev) || t > cfg.t_end) throw InvalidArgument("solve: sample_times must increase within (0, t_end]");
        prev = t;
    }
    if (cfg.dealias && cfg.nonlinearity.kind() != Nonlinearity::Kind::IntegerPower) {
        throw InvalidArgument("solve: the 2/3-rule filter applies to integer_power only");
    }
    if (!(cfg.step.rtol > 0.0) || !(cfg.step.growth > 0.0)) throw InvalidArgument("solve: invalid step policy");
}

}  // namespace detail

/// Solves ∂t u - Δu = a·∇f(u) on the periodic box by an integrating-factor
/// Dormand–Prince 5(4) scheme on the Fourier coefficients: the heat part is
/// propagated exactly, the flux term by the Runge–Kutta stages.
inline Trajectory solve(const SolverConfig& cfg) {
    detail::validate(cfg);
    using DP = detail::DormandPrince;
    const auto& g = cfg.grid;
    const auto& prop = HeatPropagator::for_grid(g);
    const auto& k2 = prop.norm2();
    const std::size_t nm = k2.size();
    const detail::FluxOperator flux(cfg);

    Trajectory traj;
    traj.grid = g;
    traj.initial = cfg.initial_data.sample(g);
    traj.initial.require_finite("solve: initial data");
    traj.conserved_mass = mass(traj.initial);

    std::vector<double> targets = cfg.sample_times;
    if (targets.empty() || targets.back() < cfg.t_end) targets.push_back(cfg.t_end);

    Spectrum u = forward(traj.initial);
    Spectrum nl = flux(u);
    double t = 0.0;
    double h = cfg.step.dt_initial;
    std::size_t consecutive_rejects = 0;
    std::size_t steps = 0;

    std::map<double, std::vector<double>> etab;
    auto expo = [&](double tau) -> const std::vector<double>& {
        auto it = etab.find(tau);
        if (it != etab.end()) return it->second;
        std::vector<double> e(nm);
        for (std::size_t i = 0; i < nm; ++i) e[i] = std::exp(-tau * k2[i]);
        return etab.emplace(tau, std::move(e)).first->second;
    };

    std::array<Spectrum, 7> K;
    std::size_t next = 0;
    while (next < targets.size()) {
        if (++steps > cfg.step.max_steps) throw StepFailure("solve: step budget exhausted at t=" + std::to_string(t));
        const double target = targets[next];
        double cap = std::max(cfg.step.dt_min, cfg.step.growth * t);
        double dt = std::min({h, cap, target - t});
        // Avoid a sliver step right before a target.
        if (target - t - dt < 1e-3 * dt) dt = target - t;

        etab.clear();
        K[0] = nl;
        Spectrum stage(g);
        for (int i = 1; i < 7; ++i) {
            const auto& ei = expo(DP::c[static_cast<std::size_t>(i)] * dt);
            for (std::size_t m = 0; m < nm; ++m) stage[m] = ei[m] * u[m];
            for (int j = 0; j < i; ++j) {
                const double aij = DP::a[i][j];
                if (aij == 0.0) continue;
                const auto& eij = expo((DP::c[static_cast<std::size_t>(i)] - DP::c[static_cast<std::size_t>(j)]) * dt);
                const double w = dt * aij;
                const auto& kj = K[static_cast<std::size_t>(j)];
                for (std::size_t m = 0; m < nm; ++m) stage[m] += w * eij[m] * kj[m];
            }
            K[static_cast<std::size_t>(i)] = flux(stage);
        }
        // stage now holds the fifth-order solution (row 7 = b).
        Spectrum err(g);
        for (int j = 0; j < 7; ++j) {
            const double d = DP::b[static_cast<std::size_t>(j)] - DP::bhat[static_cast<std::size_t>(j)];
            if (d == 0.0) continue;
            const auto& ej = expo((1.0 - DP::c[static_cast<std::size_t>(j)]) * dt);
            const auto& kj = K[static_cast<std::size_t>(j)];
            for (std::size_t m = 0; m < nm; ++m) err[m] += dt * d * ej[m] * kj[m];
        }
        const double scale = detail::spectral_norm(stage);
        const double en = scale > 0.0 ? detail::spectral_norm(err) / (cfg.step.rtol * scale) : 0.0;
        if (!std::isfinite(en)) throw StepFailure("solve: non-finite error estimate at t=" + std::to_string(t));

        if (en <= 1.0) {
            t = (dt == target - t) ? target : t + dt;
            u = stage;
            nl = K[6];
            consecutive_rejects = 0;
            ++traj.accepted_steps;
            const double factor = en > 0.0 ? std::min(4.0, std::max(0.2, 0.9 * std::pow(en, -0.2))) : 4.0;
            // A step clipped by a target or the growth cap keeps the controller's h.
            h = (dt < h && factor >= 1.0) ? std::max(h, dt * factor) : dt * factor;
            if (t == target) {
                Field f = inverse(u);
                f.require_finite("solve: sample");
                const double sup = f.max_abs();
                if (sup > 0.0 && boundary_max(f) > cfg.box_threshold * sup) {
                    throw BoxExhausted("solve: solution reaches the box boundary at t=" + std::to_string(t) +
                                       "; enlarge half_width or shorten t_end");
                }
                traj.steps.push_back({t, dt, sup, std::abs(mass(f) - traj.conserved_mass)});
                traj.times.push_back(t);
                traj.samples.push_back(std::move(f));
                ++next;
            }
        } else {
            ++traj.rejected_steps;
            if (++consecutive_rejects > 60 || dt < 1e-14 * std::max(1.0, t)) {
                throw StepFailure("solve: controller cannot meet rtol=" + std::to_string(cfg.step.rtol) +
                                  " at t=" + std::to_string(t));
            }
            h = dt * std::max(0.2, 0.9 * std::pow(en, -0.2));
        }
    }
    return traj;
}

/// Rows of t^{(n/2)(1-1/q)} ||u(t)||_q with the running supremum per q.
struct EnvelopeRow {
    double t;
    double q;
    double value;
    double running_sup;
};

struct DecayEnvelope {
    std::vector<EnvelopeRow> rows;
    double initial_l1 = 0.0;

    /// Empirical constant C in sup_t t^{(n/2)(1-1/q)}||u||_q <= C ||u_0||_1.
    double empirical_constant() const {
        double m = 0.0;
        for (const auto& r : rows) m = std::max(m, r.running_sup);
        return initial_l1 > 0.0 ? m / initial_l1 : 0.0;
    }
};

inline double decay_weight(int n, double q, double t) {
    const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
    return std::pow(t, 0.5 * n * (1.0 - iq));
}

inline DecayEnvelope decay_envelope(const Trajectory& traj, const std::vector<double>& q_list) {
    if (traj.empty()) throw InvalidArgument("decay_envelope: empty trajectory");
    DecayEnvelope env;
    env.initial_l1 = lq_norm(traj.initial, 1.0);
    for (double q : q_list) {
        double sup = 0.0;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            const double t = traj.times[i];
            const double v = decay_weight(traj.grid.dim(), q, t) * lq_norm(traj.samples[i], q);
            sup = std::max(sup, v);
            env.rows.push_back({t, q, v, sup});
        }
    }
    return env;
}

}  // namespace asymptolab
