#pragma once

#include <cmath>
#include <string>

#include "error.hpp"

namespace asymptolab {

/// Scaling data of the pair (n, p): sigma = n(p-1)/2 - 1/2 and the
/// classification of the k-th remainder by the size of (k+1) sigma vs 1/2.
class ScalingExponents {
public:
    enum class Branch { Subcritical, Critical, Supercritical };

    /// Relative tolerance used to decide (k+1) sigma == 1/2 for exponents
    /// entered as decimals (e.g. p = 2.5 for n = 1).
    static constexpr double kCriticalTolerance = 1e-12;

    ScalingExponents(int n, double p) : n_(n), p_(p) {
        if (n != 1 && n != 2) throw InvalidArgument("ScalingExponents: n must be 1 or 2");
        if (!(p > 1.0)) throw InvalidArgument("ScalingExponents: p must exceed 1");
    }

    int n() const noexcept { return n_; }
    double p() const noexcept { return p_; }
    double sigma() const noexcept { return 0.5 * n_ * (p_ - 1.0) - 0.5; }

    /// Exponent n(p-1)/2 = 1/2 + sigma of the L^1 decay of f(A_0(s)).
    double source_exponent() const noexcept { return 0.5 * n_ * (p_ - 1.0); }

    Branch branch(int k) const noexcept {
        const double lhs = (k + 1) * sigma();
        if (std::abs(lhs - 0.5) <= kCriticalTolerance) return Branch::Critical;
        return lhs < 0.5 ? Branch::Subcritical : Branch::Supercritical;
    }

    /// Exponent threshold 1 + (k+2)/((k+1) n); p below it iff (k+1) sigma < 1/2.
    double critical_exponent(int k) const noexcept {
        return 1.0 + static_cast<double>(k + 2) / (static_cast<double>(k + 1) * n_);
    }

    /// Upper end 1 + (k+1)/(k n) of the admissible range for A_{0,k}, k >= 1.
    double upper_exponent(int k) const noexcept {
        return 1.0 + static_cast<double>(k + 1) / (static_cast<double>(k) * n_);
    }

    double lower_exponent() const noexcept { return 1.0 + 1.0 / n_; }

    /// Decay exponent of the normalized remainder of A_{0,k} (log factor not included).
    double remainder_rate(int k) const noexcept {
        return branch(k) == Branch::Subcritical ? (k + 1) * sigma() : 0.5;
    }

    static std::string branch_name(Branch b) {
        switch (b) {
            case Branch::Subcritical: return "subcritical";
            case Branch::Critical: return "critical";
            case Branch::Supercritical: return "supercritical";
        }
        return "?";
    }

private:
    int n_;
    double p_;
};

}  // namespace asymptolab
