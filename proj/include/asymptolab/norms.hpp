#pragma once

#include <cmath>
#include <limits>

#include "field.hpp"
#include "multi_index.hpp"

namespace asymptolab {

/// Default boundary-mass threshold relative to ||φ||_∞.
inline constexpr double kBoundaryThreshold = 1e-12;

/// Sentinel for q = ∞.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Riemann-sum L^q norm; q = ∞ gives the grid maximum of |φ|.
inline double lq_norm(const Field& phi, double q) {
    if (!(q >= 1.0)) throw InvalidArgument("lq_norm: q must lie in [1, inf]");
    if (std::isinf(q)) return phi.max_abs();
    const auto v = phi.values();
    if (q == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s * phi.grid().cell_volume();
    }
    // Scale by the max to keep |φ|^q in range for large q.
    const double m = phi.max_abs();
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x) / m, q);
    return m * std::pow(s * phi.grid().cell_volume(), 1.0 / q);
}

/// Riemann sum of φ. On the periodic box this is exact for the zero mode,
/// so no truncation check is made.
inline double mass(const Field& phi) {
    double s = 0.0;
    for (double x : phi.values()) s += x;
    return s * phi.grid().cell_volume();
}

/// Largest |φ| on the outer shell of the box (outermost max(2, N/64) points
/// along any axis).
inline double boundary_max(const Field& phi) {
    const auto& g = phi.grid();
    const std::size_t n = g.points_per_axis();
    const std::size_t shell = std::max<std::size_t>(2, n / 64);
    auto near_edge = [&](std::size_t j) { return j < shell || j >= n - shell; };
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const bool edge = g.dim() == 1 ? near_edge(i) : (near_edge(i / n) || near_edge(i % n));
        if (edge) m = std::max(m, std::abs(phi[i]));
    }
    return m;
}

/// Throws BoundaryMassWarning when the boundary shell carries more than
/// `threshold * ||φ||_∞`.
inline void check_boundary(const Field& phi, double threshold, const char* context) {
    const double sup = phi.max_abs();
    if (sup == 0.0) return;
    const double edge = boundary_max(phi);
    if (edge > threshold * sup) {
        throw BoundaryMassWarning(std::string(context) + ": boundary shell carries " + std::to_string(edge / sup) +
                                  " of the field maximum; moment untrusted");
    }
}

/// M_β(φ) = (1/β!) ∫ x^β φ dx for |β| <= 2.
inline double moment(const MultiIndex& beta, const Field& phi, double threshold = kBoundaryThreshold) {
    if (beta.dim() != phi.grid().dim()) throw InvalidArgument("moment: dimension mismatch");
    if (beta.order() > 2) throw InvalidArgument("moment: only |beta| <= 2 is supported");
    check_boundary(phi, threshold, "moment");
    const auto& g = phi.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.point(i);
        double w = 1.0;
        for (int j = 0; j < beta.dim(); ++j) w *= std::pow(x[static_cast<std::size_t>(j)], beta[j]);
        s += w * phi[i];
    }
    return s * g.cell_volume() / static_cast<double>(beta.factorial());
}

/// ∫ |x| |φ(x)| dx.
inline double weighted_l1_norm(const Field& phi, double threshold = kBoundaryThreshold) {
    check_boundary(phi, threshold, "weighted_l1_norm");
    const auto& g = phi.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.point(i);
        s += std::hypot(x[0], x[1]) * std::abs(phi[i]);
    }
    return s * g.cell_volume();
}

/// ∫ |x^β φ(x)| dx, the weight appearing in the heat-expansion error bound.
inline double monomial_l1_norm(const MultiIndex& beta, const Field& phi) {
    const auto& g = phi.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto x = g.point(i);
        double w = 1.0;
        for (int j = 0; j < beta.dim(); ++j) w *= std::pow(x[static_cast<std::size_t>(j)], beta[j]);
        s += std::abs(w * phi[i]);
    }
    return s * g.cell_volume();
}

}  // namespace asymptolab
