#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"

namespace asymptolab {

/// Multi-index alpha in Z_{>=0}^n for n in {1, 2}. Orders above kMaxOrder are
/// rejected at construction.
class MultiIndex {
public:
    static constexpr int kMaxOrder = 4;

    MultiIndex() = default;

    explicit MultiIndex(int a1) : dim_(1), c_{a1, 0} { validate(); }
    MultiIndex(int a1, int a2) : dim_(2), c_{a1, a2} { validate(); }

    static MultiIndex zero(int dim) { return dim == 1 ? MultiIndex(0) : MultiIndex(0, 0); }

    /// Unit index e_j (j is zero-based).
    static MultiIndex unit(int dim, int j) {
        if (j < 0 || j >= dim) throw InvalidArgument("MultiIndex::unit: axis out of range");
        if (dim == 1) return MultiIndex(1);
        return j == 0 ? MultiIndex(1, 0) : MultiIndex(0, 1);
    }

    /// All multi-indices of dimension `dim` with |beta| == order, in
    /// lexicographically decreasing order of the first component.
    static std::vector<MultiIndex> of_order(int dim, int order) {
        std::vector<MultiIndex> out;
        if (dim == 1) {
            out.emplace_back(order);
        } else {
            for (int a = order; a >= 0; --a) out.emplace_back(a, order - a);
        }
        return out;
    }

    int dim() const noexcept { return dim_; }
    int operator[](int j) const noexcept { return c_[static_cast<std::size_t>(j)]; }
    int order() const noexcept { return c_[0] + c_[1]; }

    /// alpha! = prod_j alpha_j!
    std::int64_t factorial() const noexcept { return fact(c_[0]) * fact(c_[1]); }

    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
        if (a.dim_ != b.dim_) throw InvalidArgument("MultiIndex: dimension mismatch");
        return a.dim_ == 1 ? MultiIndex(a.c_[0] + b.c_[0]) : MultiIndex(a.c_[0] + b.c_[0], a.c_[1] + b.c_[1]);
    }

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) noexcept {
        return a.dim_ == b.dim_ && a.c_ == b.c_;
    }

    std::string describe() const {
        if (dim_ == 1) return "(" + std::to_string(c_[0]) + ")";
        return "(" + std::to_string(c_[0]) + "," + std::to_string(c_[1]) + ")";
    }

    static std::int64_t fact(int k) noexcept {
        std::int64_t r = 1;
        for (int i = 2; i <= k; ++i) r *= i;
        return r;
    }

private:
    void validate() const {
        if (c_[0] < 0 || c_[1] < 0) throw InvalidArgument("MultiIndex: negative component");
        if (order() > kMaxOrder) {
            throw OrderTooHigh("MultiIndex: order " + std::to_string(order()) + " exceeds " +
                               std::to_string(kMaxOrder));
        }
    }

    int dim_ = 1;
    std::array<int, 2> c_{0, 0};
};

}  // namespace asymptolab
