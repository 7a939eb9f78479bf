#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "multi_index.hpp"

namespace asymptolab {

/// Multi-variable Hermite polynomial
///   h_α(x) = Σ_{2β ≤ α} (-1)^{|β|} α! / (β! (α-2β)!) x^{α-2β},
/// stored as an exact integer coefficient table.
class HermitePolynomial {
public:
    struct Term {
        std::int64_t coefficient;
        std::array<int, 2> power;
    };

    explicit HermitePolynomial(const MultiIndex& alpha) : alpha_(alpha) {
        const int b1max = alpha[0] / 2;
        const int b2max = alpha.dim() == 2 ? alpha[1] / 2 : 0;
        for (int b1 = 0; b1 <= b1max; ++b1) {
            for (int b2 = 0; b2 <= b2max; ++b2) {
                const std::int64_t num = alpha.factorial();
                const std::int64_t den = MultiIndex::fact(b1) * MultiIndex::fact(b2) *
                                         MultiIndex::fact(alpha[0] - 2 * b1) *
                                         MultiIndex::fact(alpha.dim() == 2 ? alpha[1] - 2 * b2 : 0);
                const std::int64_t sign = ((b1 + b2) % 2 == 0) ? 1 : -1;
                terms_.push_back({sign * (num / den), {alpha[0] - 2 * b1, alpha.dim() == 2 ? alpha[1] - 2 * b2 : 0}});
            }
        }
    }

    const MultiIndex& alpha() const noexcept { return alpha_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }

    double operator()(double x, double y = 0.0) const noexcept {
        double s = 0.0;
        for (const auto& t : terms_) s += static_cast<double>(t.coefficient) * ipow(x, t.power[0]) * ipow(y, t.power[1]);
        return s;
    }

private:
    static double ipow(double x, int k) noexcept {
        double r = 1.0;
        for (int i = 0; i < k; ++i) r *= x;
        return r;
    }

    MultiIndex alpha_;
    std::vector<Term> terms_;
};

/// h_α at the point (x, y); y is ignored for one-dimensional α.
inline double hermite_eval(const MultiIndex& alpha, double x, double y = 0.0) {
    return HermitePolynomial(alpha)(x, y);
}

}  // namespace asymptolab
