#pragma once

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "error.hpp"

namespace asymptolab {

/// A quadrature rule: ∫ g ≈ Σ weights[i] g(nodes[i]).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const noexcept { return nodes.size(); }

    void append(const QuadratureRule& other) {
        nodes.insert(nodes.end(), other.nodes.begin(), other.nodes.end());
        weights.insert(weights.end(), other.weights.begin(), other.weights.end());
    }

    template <typename Fn>
    double integrate(Fn&& g) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * g(nodes[i]);
        return s;
    }
};

/// Gauss–Legendre rule with `n` nodes on [-1, 1], ascending.
inline const QuadratureRule& gauss_legendre(int n) {
    if (n < 1 || n > 128) throw InvalidArgument("gauss_legendre: node count must lie in [1, 128]");
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    const auto pos = boost::math::legendre_p_zeros<double>(n);
    std::vector<double> x;
    for (auto z : pos) {
        if (z != 0.0) x.push_back(-z);
        x.push_back(z);
    }
    std::sort(x.begin(), x.end());
    QuadratureRule rule;
    for (double z : x) {
        // One Newton polish, then w = 2 / ((1 - x^2) P_n'(x)^2).
        double p = boost::math::legendre_p(n, z);
        double dp = n * (z * p - boost::math::legendre_p(n - 1, z)) / (z * z - 1.0);
        z -= p / dp;
        p = boost::math::legendre_p(n, z);
        dp = n * (z * p - boost::math::legendre_p(n - 1, z)) / (z * z - 1.0);
        rule.nodes.push_back(z);
        rule.weights.push_back(2.0 / ((1.0 - z * z) * dp * dp));
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

/// Gauss–Legendre rule mapped to [a, b].
inline QuadratureRule gauss_panel(double a, double b, int n) {
    const auto& ref = gauss_legendre(n);
    QuadratureRule r;
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        r.nodes.push_back(c + h * ref.nodes[i]);
        r.weights.push_back(h * ref.weights[i]);
    }
    return r;
}

/// Composite rule over consecutive panels [edges[i], edges[i+1]].
inline QuadratureRule composite(const std::vector<double>& edges, int per_panel) {
    QuadratureRule r;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (edges[i + 1] > edges[i]) r.append(gauss_panel(edges[i], edges[i + 1], per_panel));
    }
    return r;
}

/// Dyadic panel edges a, 2a, 4a, ... up to b (last panel possibly shorter).
inline std::vector<double> dyadic_edges(double a, double b) {
    if (!(a > 0.0) || !(b >= a)) throw InvalidArgument("dyadic_edges: need 0 < a <= b");
    std::vector<double> e{a};
    while (e.back() * 2.0 < b * (1.0 - 1e-14)) e.push_back(e.back() * 2.0);
    if (e.back() < b) e.push_back(b);
    return e;
}

/// Edges 0, lo, 2lo, ..., b, graded geometrically toward 0.
inline std::vector<double> graded_edges(double b, int levels) {
    std::vector<double> e{0.0};
    for (int i = levels; i >= 1; --i) e.push_back(b * std::ldexp(1.0, -i));
    e.push_back(b);
    return e;
}

/// Rule on [0, b] for integrands carrying a factor s^{-gamma} (0 <= gamma < 1)
/// at s = 0. Substitutes s = b e^{-v}; the returned weights already include
/// the Jacobian, so the rule integrates g(s) directly.
inline QuadratureRule left_singular_rule(double b, double gamma, int per_panel = 8, double panel_width = 2.0) {
    if (!(gamma < 1.0)) throw InvalidArgument("left_singular_rule: exponent must be below 1");
    const double vmax = 36.0 / (1.0 - gamma);
    QuadratureRule r;
    for (double v0 = 0.0; v0 < vmax; v0 += panel_width) {
        const auto p = gauss_panel(v0, std::min(v0 + panel_width, vmax), per_panel);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double s = b * std::exp(-p.nodes[i]);
            r.nodes.push_back(s);
            r.weights.push_back(p.weights[i] * s);
        }
    }
    return r;
}

/// Rule on [a, b] removing a (b - s)^{-1/2} endpoint factor at s = b through
/// s = b - τ^2.
inline QuadratureRule right_sqrt_rule(double a, double b, int n) {
    const auto p = gauss_panel(0.0, std::sqrt(b - a), n);
    QuadratureRule r;
    for (std::size_t i = p.size(); i-- > 0;) {
        const double tau = p.nodes[i];
        r.nodes.push_back(b - tau * tau);
        r.weights.push_back(2.0 * tau * p.weights[i]);
    }
    return r;
}

}  // namespace asymptolab
