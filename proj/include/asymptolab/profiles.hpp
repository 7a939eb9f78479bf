#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dilation.hpp"
#include "fft.hpp"
#include "heat.hpp"
#include "multi_index.hpp"
#include "nonlinearity.hpp"
#include "norms.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "scaling.hpp"
#include "solver.hpp"

namespace asymptolab {

/// Physical and numerical inputs shared by every profile construction.
struct ProfileParams {
    Nonlinearity f = Nonlinearity::abs_power_signed(2.0);
    std::array<double, 2> a{1.0, 0.0};
    double mass = 1.0;                          ///< M_0(u_0)
    std::array<double, 2> first_moments{0.0, 0.0};  ///< M_{e_j}(u_0)
    int nodes_per_panel = 8;
    bool override_range = false;                ///< exploratory use off the theorem ranges
};

enum class ProfileFamily { A0k, TildeA0, A1k, Lambda, StarR02, StarS01, StarS02, StarTildeR01, BurgersWave };

/// Which asymptotic object to build.
struct ProfileSpec {
    ProfileFamily family = ProfileFamily::A0k;
    int k = 0;
    MultiIndex alpha;
    int m = 0;
    ProfileParams params;
};

/// ψ_{0,k} truncated at S_max, with the fitted tail estimates.
struct PsiIntegral {
    int k = 0;
    Field value;
    double s_max = 0.0;
    double tail_bound = 0.0;   ///< C · S_max^{1/2-(k+1)σ} bound on ||tail||_1
    double tail_mass = 0.0;    ///< two-term power-law extrapolation of ∫_{S_max}^∞ M_0(integrand)

    /// M_0(ψ_{0,k}) including the extrapolated tail.
    double mass_estimate() const { return mass(value) + tail_mass; }
};

namespace detail {

/// spec += scale · Ĝ_T (grid FFT convention), exponentials evaluated inline.
inline void add_gaussian(Spectrum& spec, const std::vector<double>& norm2, double T, double scale) {
    const auto& g = spec.grid();
    const double amp = scale / g.cell_volume();
    const std::size_t h = g.points_per_axis() / 2 + 1;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const std::size_t parity = g.dim() == 1 ? i : (i / h + i % h);
        const double v = amp * std::exp(-T * norm2[i]);
        spec[i] += (parity % 2 == 0) ? v : -v;
    }
}

/// ||G_1^p||_1 = (4π)^{-n(p-1)/2} p^{-n/2}.
inline double gauss_power_mass(int n, double p) {
    return std::pow(4.0 * GridSpec::kPi, -0.5 * n * (p - 1.0)) * std::pow(p, -0.5 * n);
}

/// Weighted sum Σ w_i ŝ_i of per-node spectra, evaluated in parallel and
/// reduced in node order.
template <typename NodeSpectrum>
Spectrum weighted_sum(const GridSpec& g, const QuadratureRule& rule, NodeSpectrum&& node) {
    std::vector<Spectrum> parts(rule.size());
    parallel_for(rule.size(), [&](std::size_t i) { parts[i] = node(rule.nodes[i]); });
    Spectrum total(g);
    for (std::size_t i = 0; i < parts.size(); ++i) total.axpy(rule.weights[i], parts[i]);
    return total;
}

}  // namespace detail

/// ∫_{s0}^{s1} a·∇e^{(t-s)Δ} integrand(s) ds by composite Gauss–Legendre on
/// panels graded toward s0 (dyadic if s0 > 0, geometric toward 0 otherwise).
/// With `singular_end`, the panel ending at s1 = t uses s = t - τ^2. The node
/// count per panel doubles until successive results agree to `tolerance`
/// in L^1 (relative); QuadratureBudgetExceeded past 64 nodes per panel.
inline Field duhamel(const GridSpec& grid, double t, const std::function<Field(double)>& integrand, double s0, double s1,
                     const std::array<double, 2>& a, bool singular_end = false, int nodes_per_panel = 8,
                     double tolerance = 1e-10) {
    if (!(s0 >= 0.0) || !(s1 > s0) || s1 > t) throw InvalidArgument("duhamel: need 0 <= s0 < s1 <= t");
    if (nodes_per_panel < 8) throw InvalidArgument("duhamel: at least 8 nodes per panel");
    std::vector<double> edges;
    if (s0 > 0.0) {
        edges = dyadic_edges(s0, s1);
    } else {
        edges = graded_edges(s1, 30);
        edges.erase(edges.begin());
        edges.insert(edges.begin(), 0.0);
    }
    const auto& g = HeatPropagator::for_grid(grid);
    auto evaluate = [&](int npp) {
        QuadratureRule rule;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            const bool last = i + 2 == edges.size();
            if (last && singular_end && s1 == t) {
                rule.append(right_sqrt_rule(edges[i], edges[i + 1], npp));
            } else {
                rule.append(gauss_panel(edges[i], edges[i + 1], npp));
            }
        }
        auto total = detail::weighted_sum(g.grid(), rule, [&](double s) {
            auto sp = forward(integrand(s));
            g.apply_spectrum(t - s, MultiIndex::zero(g.grid().dim()), sp);
            return sp;
        });
        g.apply_convection(a, total);
        return inverse(total);
    };
    Field prev = evaluate(nodes_per_panel);
    for (int npp = 2 * nodes_per_panel; npp <= 64; npp *= 2) {
        Field next = evaluate(npp);
        const double scale = std::max(lq_norm(next, 1.0), std::numeric_limits<double>::min());
        const double change = lq_norm(next - prev, 1.0);
        if (change <= tolerance * scale || change == 0.0) return next;
        prev = std::move(next);
    }
    throw QuadratureBudgetExceeded("duhamel: panel refinement stalled above tolerance " + std::to_string(tolerance));
}

/// Builds A_0, A_{0,k}, Ã_{0,k+1}, A_{1,k} and ψ_{0,k} on a fixed grid.
/// Lower-order profiles are memoized at the quadrature nodes.
class ProfileBuilder {
public:
    ProfileBuilder(GridSpec grid, ProfileParams params)
        : grid_(grid), params_(std::move(params)), scaling_(grid.dim(), params_.f.exponent()),
          prop_(HeatPropagator::for_grid(grid)) {
        if (params_.nodes_per_panel < 8) throw InvalidArgument("ProfileBuilder: quadrature budget below 8 nodes per panel");
        if (grid.dim() == 1 && params_.a[1] != 0.0) throw InvalidArgument("ProfileBuilder: a has two components on a 1D grid");
    }

    const GridSpec& grid() const noexcept { return grid_; }
    const ProfileParams& params() const noexcept { return params_; }
    const ScalingExponents& scaling() const noexcept { return scaling_; }

    /// True when t lies beyond the threshold 2^k of the decay estimates.
    static bool in_estimate_range(int k, double t) noexcept { return k == 0 || t > std::ldexp(1.0, k); }

    /// A_0(t) = M_0(u_0) δ_t G_1 (band-limited periodic sample).
    Field A0(double t) const {
        if (!(t > 0.0)) throw InvalidArgument("A0: t must be positive");
        return inverse(A0_spectrum(t));
    }

    /// A_{0,k}(t).
    Field profile_A0k(int k, double t) const {
        if (k < 0) throw InvalidArgument("profile_A0k: k must be non-negative");
        if (k == 0) return A0(t);
        check_A0k_range(k);
        return memo(k, t, [&] { return inverse(A0k_spectrum(k, t)); });
    }

    /// R_{0,1}(t) = A_{0,1}(t) - A_0(t) = ∫_0^t a·∇e^{(t-s)Δ} f(A_0(s)) ds.
    Field remainder_R01(double t) const {
        check_A0k_range(1);
        auto s = gauss_duhamel(t, t);
        prop_.apply_convection(params_.a, s);
        return inverse(s);
    }

    /// M_0(R_{0,1}(1) f'(A_0(1))), which vanishes by oddness.
    double odd_moment() const {
        auto prod = remainder_R01(1.0);
        prod *= params_.f.apply_derivative(A0(1.0));
        return mass(prod);
    }

    /// I_k(t) = ∫_1^t M_0(f(A_{0,k}(s)) - f(A_{0,k-1}(s))) ds with f(A_{0,-1}) := 0.
    double tildeA_integral(int k, double t) const {
        if (!(t >= 1.0)) throw InvalidArgument("tildeA_integral: t must be at least 1");
        if (t == 1.0) return 0.0;
        const auto rule = composite(dyadic_edges(1.0, t), params_.nodes_per_panel);
        std::vector<double> vals(rule.size());
        parallel_for(rule.size(), [&](std::size_t i) {
            const double s = rule.nodes[i];
            double v = mass(params_.f.apply(profile_A0k(k, s)));
            if (k >= 1) v -= mass(params_.f.apply(profile_A0k(k - 1, s)));
            vals[i] = v;
        });
        double acc = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) acc += rule.weights[i] * vals[i];
        return acc;
    }

    /// Ã_{0,k+1}(t) = A_{0,k}(t) - (1/2) I_k(t) t^{-1/2} δ_t(Σ a_j x_j G_1).
    Field profile_tildeA(int k_plus_1, double t) const {
        const int k = k_plus_1 - 1;
        if (k < 0) throw InvalidArgument("profile_tildeA: order must be at least 1");
        if (!params_.override_range && scaling_.branch(k) != ScalingExponents::Branch::Critical) {
            throw RangeViolation("profile_tildeA: p=" + std::to_string(scaling_.p()) +
                                 " is not the critical exponent " + std::to_string(scaling_.critical_exponent(k)));
        }
        Field out = profile_A0k(k, t);
        const double coeff = -0.5 * tildeA_integral(k, t);
        if (coeff == 0.0) return out;
        out.axpy(coeff / std::sqrt(t), convection_mode(t));
        return out;
    }

    /// A_{1,k}(t) = A_{0,k}(t) + (1/2) t^{-1/2} Σ_j (M_{e_j}(u_0) - a_j M_0(ψ_{0,k})) δ_t(x_j G_1).
    Field profile_A1k(int k, double t, const PsiIntegral& psi) const {
        if (psi.k != k) throw InvalidArgument("profile_A1k: psi computed for a different k");
        check_A1k_range(k);
        Field out = profile_A0k(k, t);
        out += first_order_shape_at(t, psi);
        return out;
    }

    /// A_{1,k}(t) - A_{0,k}(t) = t^{-1/2} δ_t(A_{1,k}(1) - A_{0,k}(1)).
    Field first_order_shape_at(double t, const PsiIntegral& psi) const {
        const double m0psi = psi.mass_estimate();
        Field out(grid_);
        for (int j = 0; j < grid_.dim(); ++j) {
            const double c = params_.first_moments[static_cast<std::size_t>(j)] - params_.a[static_cast<std::size_t>(j)] * m0psi;
            if (c != 0.0) out.axpy(0.5 * c / std::sqrt(t), first_mode(grid_, j, t));
        }
        return out;
    }

    /// Times at which compute_psi reads the trajectory.
    std::vector<double> psi_node_times(double s_max) const {
        std::vector<double> out;
        for (const auto& r : psi_rules(s_max)) out.insert(out.end(), r.nodes.begin(), r.nodes.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    /// ψ_{0,k} = ∫_0^1 (f(u) - f(A_0)) ds + ∫_1^{S_max} (f(u) - f(A_{0,k-1})) ds, and
    /// ψ_{0,0} = ∫_0^{S_max} f(u) ds.
    PsiIntegral compute_psi(int k, const Trajectory& traj, double s_max,
                            double tail_tolerance = std::numeric_limits<double>::infinity()) const {
        if (k < 0) throw InvalidArgument("compute_psi: k must be non-negative");
        if (!(traj.grid == grid_)) throw GridMismatch("compute_psi: trajectory on a different grid");
        if (!(s_max >= 2.0)) throw InvalidArgument("compute_psi: S_max must be at least 2");
        const auto rules = psi_rules(s_max);
        const auto& early = rules[0];
        const auto& late = rules[1];

        auto integrand = [&](double s, bool after_one) {
            Field v = params_.f.apply(traj.at(s));
            if (k >= 1 && after_one) v -= params_.f.apply(profile_A0k(k - 1, s));
            return v;
        };

        std::vector<Field> early_vals(early.size()), late_vals(late.size());
        parallel_for(early.size(), [&](std::size_t i) { early_vals[i] = integrand(early.nodes[i], false); });
        parallel_for(late.size(), [&](std::size_t i) { late_vals[i] = integrand(late.nodes[i], true); });

        PsiIntegral psi;
        psi.k = k;
        psi.s_max = s_max;
        psi.value = Field(grid_);
        for (std::size_t i = 0; i < early.size(); ++i) psi.value.axpy(early.weights[i], early_vals[i]);
        for (std::size_t i = 0; i < late.size(); ++i) psi.value.axpy(late.weights[i], late_vals[i]);
        if (k >= 1) {
            // ∫_0^1 f(A_0(s)) ds = f(M) ∫_0^1 c_p(s) G_{s/p} ds, integrated spectrally.
            const double p = params_.f.exponent();
            const auto rule = left_singular_rule(1.0, scaling_.source_exponent(), 2 * params_.nodes_per_panel);
            Spectrum s(grid_);
            for (std::size_t i = 0; i < rule.size(); ++i) {
                const double si = rule.nodes[i];
                detail::add_gaussian(s, prop_.norm2(), si / p, rule.weights[i] * power_coefficient(si));
            }
            psi.value -= inverse(s);
        }

        // Tail model from the last decade of nodes: ||g(s)||_1 <= C s^{-e} and
        // M_0(g(s)) = s^{-e} (D + E s^{-δ}).
        const double e = 0.5 + (k + 1) * scaling_.sigma();
        const double delta = k == 0 ? std::min(2.0 * scaling_.sigma(), 1.0) : std::min(scaling_.sigma(), 0.5);
        double cmax = 0.0;
        double s11 = 0.0, s12 = 0.0, s22 = 0.0, r1 = 0.0, r2 = 0.0;
        for (std::size_t i = 0; i < late.size(); ++i) {
            const double s = late.nodes[i];
            if (s < s_max / 10.0) continue;
            cmax = std::max(cmax, lq_norm(late_vals[i], 1.0) * std::pow(s, e));
            const double y = mass(late_vals[i]) * std::pow(s, e);
            const double b = std::pow(s, -delta);
            s11 += 1.0;
            s12 += b;
            s22 += b * b;
            r1 += y;
            r2 += b * y;
        }
        double D = s11 > 0.0 ? r1 / s11 : 0.0, E = 0.0;
        const double det = s11 * s22 - s12 * s12;
        if (det > 1e-12 * s11 * s22) {
            D = (r1 * s22 - r2 * s12) / det;
            E = (s11 * r2 - s12 * r1) / det;
        }
        if (e > 1.0) {
            psi.tail_bound = cmax * std::pow(s_max, 1.0 - e) / (e - 1.0);
            psi.tail_mass = D * std::pow(s_max, 1.0 - e) / (e - 1.0) + E * std::pow(s_max, 1.0 - e - delta) / (e + delta - 1.0);
        } else {
            psi.tail_bound = cmax > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            psi.tail_mass = 0.0;
        }
        if (psi.tail_bound > tail_tolerance) {
            throw TailBudgetExceeded("compute_psi: estimated tail " + std::to_string(psi.tail_bound) +
                                     " exceeds tolerance " + std::to_string(tail_tolerance));
        }
        return psi;
    }

    /// δ_t(Σ_j a_j x_j G_1).
    Field convection_mode(double t) const {
        Field out(grid_);
        for (int j = 0; j < grid_.dim(); ++j) {
            const double aj = params_.a[static_cast<std::size_t>(j)];
            if (aj != 0.0) out.axpy(aj, first_mode(grid_, j, t));
        }
        return out;
    }

private:
    Spectrum A0_spectrum(double t) const {
        Spectrum s(grid_);
        detail::add_gaussian(s, prop_.norm2(), t, params_.mass);
        return s;
    }

    /// f(M) c_p(s) with f(A_0(s)) = f(M) c_p(s) G_{s/p}, c_p(s) = (4πs)^{-n(p-1)/2} p^{-n/2}.
    double power_coefficient(double s) const {
        const int n = grid_.dim();
        const double p = params_.f.exponent();
        return params_.f(params_.mass) * std::pow(4.0 * GridSpec::kPi * s, -0.5 * n * (p - 1.0)) * std::pow(p, -0.5 * n);
    }

    /// Σ_i w_i e^{(t-s_i)Δ} f(A_0(s_i)) over s ∈ (0, upper], before a·∇.
    Spectrum gauss_duhamel(double t, double upper) const {
        const double p = params_.f.exponent();
        const auto rule = left_singular_rule(upper, scaling_.source_exponent(), 2 * params_.nodes_per_panel);
        Spectrum s(grid_);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double si = rule.nodes[i];
            detail::add_gaussian(s, prop_.norm2(), t - si + si / p, rule.weights[i] * power_coefficient(si));
        }
        return s;
    }

    Spectrum A0k_spectrum(int k, double t) const {
        Spectrum total = gauss_duhamel(t, k == 1 ? t : std::min(1.0, t));
        if (k >= 2 && t > 1.0) {
            const auto rule = composite(dyadic_edges(1.0, t), params_.nodes_per_panel);
            total += detail::weighted_sum(grid_, rule, [&](double s) {
                auto sp = forward(params_.f.apply(profile_A0k(k - 1, s)));
                const double tau = t - s;
                for (std::size_t i = 0; i < sp.size(); ++i) sp[i] *= std::exp(-tau * prop_.norm2()[i]);
                return sp;
            });
        }
        prop_.apply_convection(params_.a, total);
        total += A0_spectrum(t);
        return total;
    }

    std::array<QuadratureRule, 2> psi_rules(double s_max) const {
        const int npp = params_.nodes_per_panel;
        return {composite(graded_edges(1.0, 6), npp), composite(dyadic_edges(1.0, s_max), npp)};
    }

    void check_A0k_range(int k) const {
        if (k == 0) return;
        if (!(scaling_.source_exponent() < 1.0)) {
            throw RangeViolation("A_{0," + std::to_string(k) + "}: the Duhamel integral diverges at s = 0 for p >= 1+2/n");
        }
        if (params_.override_range) return;
        const double p = scaling_.p();
        if (!(p > scaling_.lower_exponent()) || !(p < scaling_.upper_exponent(k))) {
            throw RangeViolation("A_{0," + std::to_string(k) + "} needs " + std::to_string(scaling_.lower_exponent()) +
                                 " < p < " + std::to_string(scaling_.upper_exponent(k)) + ", got p=" + std::to_string(p));
        }
    }

    void check_A1k_range(int k) const {
        if (params_.override_range) return;
        const double p = scaling_.p();
        const double lo = scaling_.critical_exponent(k);
        const double hi = k == 0 ? std::numeric_limits<double>::infinity() : scaling_.upper_exponent(k);
        if (!(p > lo) || !(p < hi)) {
            throw RangeViolation("A_{1," + std::to_string(k) + "} needs " + std::to_string(lo) + " < p < " +
                                 std::to_string(hi) + ", got p=" + std::to_string(p));
        }
    }

    template <typename Make>
    Field memo(int k, double t, Make&& make) const {
        const auto key = std::make_pair(k, t);
        {
            std::lock_guard<std::mutex> lock(memo_mutex_);
            if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        }
        Field value = make();
        std::lock_guard<std::mutex> lock(memo_mutex_);
        return memo_.emplace(key, std::move(value)).first->second;
    }

    GridSpec grid_;
    ProfileParams params_;
    ScalingExponents scaling_;
    const HeatPropagator& prop_;
    mutable std::mutex memo_mutex_;
    mutable std::map<std::pair<int, double>, Field> memo_;
};

enum class StarShape { S01, S02, R02, TildeR01 };

/// Star shapes at unit time:
///   S_{0,1}  = ∫_0^1 a·∇e^{(1-θ)Δ} G_θ^p dθ
///   S*_{0,2} = ∫_0^1 a·∇e^{(1-θ)Δ} (G_θ^{p-1} S_{0,1}(θ)) dθ,  S_{0,1}(θ) = θ^{-σ} δ_θ S_{0,1}
///   R*_{0,2} = f(M) f'(M) S*_{0,2}
///   R̃*_{0,1} = -(1/8π)(1+2/n)^{-n/2} f(M) Σ a_j x_j G_1
/// The nested integral reduces by self-similarity to
///   Ŝ*_{0,2}(ξ) = (i a·ξ) ∫_0^1 θ^{-1/2-2σ} e^{-(1-θ)|ξ|^2} Ĥ(√θ ξ) dθ,  H = G_1^{p-1} S_{0,1}.
inline Field star_shape(StarShape which, const GridSpec& unit_grid, const ProfileParams& params) {
    const int n = unit_grid.dim();
    const ScalingExponents sc(n, params.f.exponent());
    const double p = params.f.exponent();
    const double fM = params.f(params.mass);
    if (which == StarShape::TildeR01) {
        const double c = -(1.0 / (8.0 * GridSpec::kPi)) * std::pow(1.0 + 2.0 / n, -0.5 * n) * fM;
        Field out(unit_grid);
        for (int j = 0; j < n; ++j) {
            const double aj = params.a[static_cast<std::size_t>(j)];
            if (aj != 0.0) out.axpy(c * aj, first_mode(unit_grid, j, 1.0));
        }
        return out;
    }
    if (!(p < 1.0 + 2.0 / n) || (!params.override_range && !(p > sc.lower_exponent()))) {
        throw RangeViolation("star_shape: S_{0,1} needs 1+1/n < p < 1+2/n");
    }
    ProfileParams unit = params;
    unit.mass = 1.0;
    unit.f = Nonlinearity(params.f.kind(), p);
    unit.override_range = true;
    // S_{0,1}(1) = R_{0,1}(1) for unit data mass and f(1) = 1.
    const ProfileBuilder b(unit_grid, unit);
    Field s01 = b.remainder_R01(1.0);
    if (unit.f(1.0) != 1.0) s01 *= 1.0 / unit.f(1.0);
    if (which == StarShape::S01) return s01;

    if (!(2.0 * sc.sigma() < 0.5) || (!params.override_range && !(p > sc.lower_exponent()))) {
        throw RangeViolation("star_shape: S*_{0,2} needs 1+1/n < p < 1+3/(2n)");
    }
    Field H = gauss_kernel(unit_grid, 1.0).map([p](double v) { return std::pow(std::abs(v), p - 1.0); });
    H *= s01;
    const auto& prop = HeatPropagator::for_grid(unit_grid);
    const double gamma = 0.5 + 2.0 * sc.sigma();
    const auto rule = left_singular_rule(1.0, gamma, 2 * params.nodes_per_panel);
    auto total = detail::weighted_sum(unit_grid, rule, [&](double theta) {
        auto sp = scaled_spectrum(H, std::sqrt(theta));
        const double amp = std::pow(theta, -gamma);
        for (std::size_t i = 0; i < sp.size(); ++i) sp[i] *= amp * std::exp(-(1.0 - theta) * prop.norm2()[i]);
        return sp;
    });
    prop.apply_convection(params.a, total);
    Field s02 = inverse(total);
    if (which == StarShape::S02) return s02;
    s02 *= fM * params.f.derivative(params.mass);
    return s02;
}

/// Nonlinear diffusion wave (n = 1):
///   χ_t(x) = -(1/a) (e^{-aM} - 1) G_t(x) / (1 + (e^{-aM} - 1) ∫_x^∞ G_t(y) dy).
inline Field burgers_wave(const GridSpec& g, double t, double M, double a) {
    if (g.dim() != 1) throw InvalidArgument("burgers_wave: one-dimensional grids only");
    if (!(t > 0.0)) throw InvalidArgument("burgers_wave: t must be positive");
    if (a == 0.0) throw InvalidArgument("burgers_wave: a must be nonzero");
    const double c = std::expm1(-a * M);
    return Field::sample(g, [&](double x, double) {
        const double G = gauss_value(1, t, x * x);
        const double tail = 0.5 * std::erfc(x / (2.0 * std::sqrt(t)));
        return -(1.0 / a) * c * G / (1.0 + c * tail);
    });
}

}  // namespace asymptolab
