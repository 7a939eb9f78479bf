#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "fft.hpp"
#include "field.hpp"
#include "hermite.hpp"
#include "multi_index.hpp"
#include "norms.hpp"

namespace asymptolab {

/// Spectral heat semigroup on a periodic grid. Multipliers e^{-t|ξ|^2} are
/// cached per exact time value in a bounded LRU table.
class HeatPropagator {
public:
    static constexpr std::size_t kCacheSize = 64;

    using Table = std::shared_ptr<const std::vector<double>>;

    explicit HeatPropagator(GridSpec grid) : grid_(grid), norm2_(mode_norm2(grid)) {}

    const GridSpec& grid() const noexcept { return grid_; }
    const std::vector<double>& norm2() const noexcept { return norm2_; }

    /// e^{-t|ξ|^2} over the half spectrum.
    Table multiplier(double t) const {
        if (!(t >= 0.0)) throw InvalidArgument("HeatPropagator: negative time");
        std::lock_guard<std::mutex> lock(mutex_);
        if (auto it = index_.find(t); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
        auto table = std::make_shared<std::vector<double>>(norm2_.size());
        for (std::size_t i = 0; i < norm2_.size(); ++i) (*table)[i] = std::exp(-t * norm2_[i]);
        lru_.emplace_front(t, table);
        index_[t] = lru_.begin();
        if (lru_.size() > kCacheSize) {
            index_.erase(lru_.back().first);
            lru_.pop_back();
        }
        return table;
    }

    std::size_t cached_entries() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return lru_.size();
    }

    /// (iξ)^α for half-spectrum entry i. Odd derivative orders along an axis
    /// vanish at that axis' Nyquist mode.
    Complex derivative_symbol(const MultiIndex& alpha, std::size_t i) const noexcept {
        const auto k = mode_wavevector(grid_, i);
        const double nyq = grid_.nyquist();
        Complex s(1.0, 0.0);
        for (int j = 0; j < alpha.dim(); ++j) {
            const double kj = k[static_cast<std::size_t>(j)];
            if (alpha[j] % 2 == 1 && std::abs(std::abs(kj) - nyq) < 1e-9 * nyq) return {0.0, 0.0};
            for (int r = 0; r < alpha[j]; ++r) s *= Complex(0.0, kj);
        }
        return s;
    }

    /// ŝ <- (iξ)^α e^{-t|ξ|^2} ŝ
    void apply_spectrum(double t, const MultiIndex& alpha, Spectrum& s) const {
        if (alpha.order() > 3) throw OrderTooHigh("heat_apply: |alpha| must not exceed 3");
        const bool plain = alpha.order() == 0;
        if (t == 0.0 && plain) return;
        const auto m = multiplier(t);
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] *= (*m)[i];
            if (!plain) s[i] *= derivative_symbol(alpha, i);
        }
    }

    /// ∂^α e^{tΔ} φ
    Field apply(double t, const MultiIndex& alpha, const Field& phi) const {
        if (!(grid_ == phi.grid())) throw GridMismatch("HeatPropagator::apply: field on a different grid");
        if (alpha.dim() != grid_.dim()) throw InvalidArgument("heat_apply: dimension mismatch");
        if (t == 0.0 && alpha.order() == 0) return phi;
        auto s = forward(phi);
        apply_spectrum(t, alpha, s);
        return inverse(s);
    }

    /// ŝ <- (i a·ξ) ŝ
    void apply_convection(const std::array<double, 2>& a, Spectrum& s) const {
        const double nyq = grid_.nyquist();
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto k = mode_wavevector(grid_, i);
            for (auto& kj : k) {
                if (std::abs(std::abs(kj) - nyq) < 1e-9 * nyq) kj = 0.0;
            }
            s[i] *= Complex(0.0, a[0] * k[0] + a[1] * k[1]);
        }
    }

    /// Shared propagator for a grid (one per distinct GridSpec).
    static const HeatPropagator& for_grid(const GridSpec& g) {
        static std::mutex mutex;
        static std::vector<std::unique_ptr<HeatPropagator>> registry;
        std::lock_guard<std::mutex> lock(mutex);
        for (const auto& p : registry) {
            if (p->grid() == g) return *p;
        }
        registry.push_back(std::make_unique<HeatPropagator>(g));
        return *registry.back();
    }

private:
    GridSpec grid_;
    std::vector<double> norm2_;
    mutable std::mutex mutex_;
    mutable std::list<std::pair<double, Table>> lru_;
    mutable std::unordered_map<double, std::list<std::pair<double, Table>>::iterator> index_;
};

/// ∂^α e^{tΔ} φ on φ's grid.
inline Field heat_apply(double t, const MultiIndex& alpha, const Field& phi) {
    return HeatPropagator::for_grid(phi.grid()).apply(t, alpha, phi);
}

/// G_t(x) = (4πt)^{-n/2} exp(-|x|^2 / 4t), n-dimensional.
inline double gauss_value(int n, double t, double r2) {
    return std::pow(4.0 * GridSpec::kPi * t, -0.5 * n) * std::exp(-r2 / (4.0 * t));
}

/// Sampled Gauss kernel, periodized over the box (images within 8√t).
inline Field gauss_kernel(const GridSpec& g, double t) {
    if (!(t > 0.0)) throw InvalidArgument("gauss_kernel: t must be positive");
    const double rt = std::sqrt(t);
    if (rt < 3.0 * g.spacing() || rt > g.half_width() / 6.0) {
        throw ScaleOutOfRange("gauss_kernel: sqrt(t)=" + std::to_string(rt) + " not resolvable on " + g.describe());
    }
    const double period = 2.0 * g.half_width();
    const int images = static_cast<int>(std::ceil(8.0 * rt / period));
    auto periodic = [&](double x) {
        double s = 0.0;
        for (int m = -images; m <= images; ++m) {
            const double y = x + m * period;
            s += std::exp(-y * y / (4.0 * t));
        }
        return s;
    };
    const double c = std::pow(4.0 * GridSpec::kPi * t, -0.5 * g.dim());
    return Field::sample(g, [&](double x, double y) {
        return g.dim() == 1 ? c * periodic(x) : c * periodic(x) * periodic(y);
    });
}

/// Spectrum of scale·G_T in the grid's FFT convention (band-limited
/// synthesis of the periodized kernel; valid for any T >= 0).
inline Spectrum gaussian_spectrum(const GridSpec& g, double T, double scale = 1.0) {
    Spectrum s(g);
    const auto& prop = HeatPropagator::for_grid(g);
    const auto m = prop.multiplier(T);
    const double amp = scale / g.cell_volume();
    const std::size_t n = g.points_per_axis();
    const std::size_t h = n / 2 + 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::size_t parity = g.dim() == 1 ? i : (i / h + i % h);
        s[i] = ((parity % 2 == 0) ? amp : -amp) * (*m)[i];
    }
    return s;
}

/// Band-limited sample of G_T (exact unit mass).
inline Field gaussian_field(const GridSpec& g, double T, double scale = 1.0) {
    return inverse(gaussian_spectrum(g, T, scale));
}

/// δ_t(h_α G_1) sampled from the closed form t^{-n/2} h_α(x/√t) G_1(x/√t).
inline Field hermite_gaussian(const GridSpec& g, const MultiIndex& alpha, double t) {
    const HermitePolynomial h(alpha);
    const double s = 1.0 / std::sqrt(t);
    const double amp = std::pow(s, g.dim());
    return Field::sample(g, [&](double x, double y) {
        const double u = x * s, v = y * s;
        return amp * h(u, v) * gauss_value(g.dim(), 1.0, u * u + v * v);
    });
}

/// δ_t(x_j G_1) = t^{-n/2} (x_j/√t) G_1(x/√t).
inline Field first_mode(const GridSpec& g, int j, double t) {
    return hermite_gaussian(g, MultiIndex::unit(g.dim(), j), t);
}

/// Heat-semigroup asymptotic profile
///   Λ_{α,m}(t;φ) = (-2)^{-|α|} t^{-|α|/2} Σ_{k≤m} 2^{-k} t^{-k/2} Σ_{|β|=k} M_β(φ) δ_t(h_{α+β} G_1).
inline Field lambda_profile(const MultiIndex& alpha, int m, double t, const Field& phi,
                            double boundary_threshold = kBoundaryThreshold) {
    if (m < 0 || m > 2) throw InvalidArgument("lambda_profile: m must lie in {0, 1, 2}");
    if (!(t > 0.0)) throw InvalidArgument("lambda_profile: t must be positive");
    const auto& g = phi.grid();
    Field out(g);
    const double lead = std::pow(-2.0, -alpha.order()) * std::pow(t, -0.5 * alpha.order());
    for (int k = 0; k <= m; ++k) {
        const double ck = lead * std::pow(2.0, -k) * std::pow(t, -0.5 * k);
        for (const auto& beta : MultiIndex::of_order(g.dim(), k)) {
            const double mb = moment(beta, phi, boundary_threshold);
            if (mb == 0.0) continue;
            out.axpy(ck * mb, hermite_gaussian(g, alpha + beta, t));
        }
    }
    return out;
}

/// Both sides of the heat-expansion error estimate
///   t^{(n/2)(1-1/q)+(|α|+m)/2} ||∂^α e^{tΔ}φ - Λ_{α,m}(t;φ)||_q
///     <= 2^{-(|α|+m+1)} t^{-1/2} Σ_{|β|=m+1} (1/β!) ||h_{α+β} G_1||_q ||x^β φ||_1.
struct HeatBoundSample {
    double t = 0.0;
    double q = 1.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin() const noexcept { return rhs - lhs; }
};

/// Whole-line ||h_k G_1||_q (n = 1), by adaptive Gauss-Kronrod between the roots of h_k.
/// In two dimensions the norm factorizes over the axes.
inline double hermite_gaussian_norm(int k, double q) {
    const HermitePolynomial h{MultiIndex(k)};
    auto value = [&](double x) { return h(x) * gauss_value(1, 1.0, x * x); };
    std::vector<double> edges{-40.0};
    double prev = value(-12.0);
    for (double x = -12.0 + 1e-3; x <= 12.0; x += 1e-3) {
        const double v = value(x);
        if ((v < 0.0) != (prev < 0.0)) {
            edges.push_back(boost::math::tools::bisect([&](double z) { return value(z); }, x - 1e-3, x,
                                                       boost::math::tools::eps_tolerance<double>(52))
                                .first);
        }
        prev = v;
    }
    edges.push_back(40.0);
    if (std::isinf(q)) {
        double best = 0.0;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            const auto r = boost::math::tools::brent_find_minima([&](double x) { return -std::abs(value(x)); },
                                                                 std::max(edges[i], -12.0), std::min(edges[i + 1], 12.0), 52);
            best = std::max(best, -r.second);
        }
        return best;
    }
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double x) { return std::pow(std::abs(value(x)), q); }, edges[i], edges[i + 1], 15u, 1e-14);
    }
    return std::pow(total, 1.0 / q);
}

inline HeatBoundSample heat_expansion_bound(const MultiIndex& alpha, int m, double t, double q, const Field& phi) {
    if (m < 0 || m > 1) throw InvalidArgument("heat_expansion_bound: m must lie in {0, 1}");
    const auto& g = phi.grid();
    const int n = g.dim();
    HeatBoundSample s;
    s.t = t;
    s.q = q;
    const double iq = std::isinf(q) ? 0.0 : 1.0 / q;
    const auto err = heat_apply(t, alpha, phi) - lambda_profile(alpha, m, t, phi);
    s.lhs = std::pow(t, 0.5 * n * (1.0 - iq) + 0.5 * (alpha.order() + m)) * lq_norm(err, q);
    double sum = 0.0;
    for (const auto& beta : MultiIndex::of_order(n, m + 1)) {
        const auto ab = alpha + beta;
        double hg = hermite_gaussian_norm(ab[0], q);
        if (n == 2) hg *= hermite_gaussian_norm(ab[1], q);
        sum += hg * monomial_l1_norm(beta, phi) / static_cast<double>(beta.factorial());
    }
    s.rhs = std::ldexp(1.0, -(alpha.order() + m + 1)) / std::sqrt(t) * sum;
    return s;
}

}  // namespace asymptolab
