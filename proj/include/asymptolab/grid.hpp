#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "error.hpp"

namespace asymptolab {

/// Uniform periodic grid on the box [-L, L)^n, n in {1, 2}, N points per axis.
///
/// Point j along an axis sits at x_j = -L + j * dx with dx = 2L / N. The
/// point set is symmetric under x -> -x modulo the periodic identification of
/// -L with L, so odd fields integrate to zero up to rounding.
class GridSpec {
public:
    GridSpec() = default;

    GridSpec(int dim, double half_width, std::size_t points_per_axis)
        : dim_(dim), half_width_(half_width), n_(points_per_axis) {
        if (dim != 1 && dim != 2) {
            throw InvalidArgument("GridSpec: dim must be 1 or 2, got " + std::to_string(dim));
        }
        if (!(half_width > 0.0)) {
            throw InvalidArgument("GridSpec: half_width must be positive");
        }
        if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0) {
            throw InvalidArgument("GridSpec: points_per_axis must be a power of two >= 8, got " +
                                  std::to_string(points_per_axis));
        }
        spacing_ = 2.0 * half_width / static_cast<double>(points_per_axis);
    }

    int dim() const noexcept { return dim_; }
    double half_width() const noexcept { return half_width_; }
    std::size_t points_per_axis() const noexcept { return n_; }
    double spacing() const noexcept { return spacing_; }

    std::size_t size() const noexcept { return dim_ == 1 ? n_ : n_ * n_; }

    /// Volume element dx^n of the Riemann sums.
    double cell_volume() const noexcept { return dim_ == 1 ? spacing_ : spacing_ * spacing_; }

    double coordinate(std::size_t j) const noexcept {
        return -half_width_ + static_cast<double>(j) * spacing_;
    }

    /// Coordinates of flat index `i` (row-major, last axis fastest).
    std::array<double, 2> point(std::size_t i) const noexcept {
        if (dim_ == 1) return {coordinate(i), 0.0};
        return {coordinate(i / n_), coordinate(i % n_)};
    }

    /// Angular wavenumber of FFT index `k` along an axis (k in [0, N)).
    double wavenumber(std::size_t k) const noexcept {
        const auto signed_k = k <= n_ / 2 ? static_cast<double>(k)
                                          : static_cast<double>(k) - static_cast<double>(n_);
        return signed_k * kPi / half_width_;
    }

    /// Wavenumber magnitude at which the grid's Nyquist frequency sits.
    double nyquist() const noexcept { return kPi / spacing_; }

    friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
        return a.dim_ == b.dim_ && a.half_width_ == b.half_width_ && a.n_ == b.n_;
    }

    std::string describe() const {
        return "GridSpec{dim=" + std::to_string(dim_) + ", L=" + std::to_string(half_width_) +
               ", N=" + std::to_string(n_) + "}";
    }

    static constexpr double kPi = 3.14159265358979323846;

private:
    int dim_ = 1;
    double half_width_ = 1.0;
    std::size_t n_ = 8;
    double spacing_ = 0.25;
};

}  // namespace asymptolab
