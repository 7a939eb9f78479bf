#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "error.hpp"
#include "grid.hpp"

namespace asymptolab {

/// A real function sampled on a GridSpec. Values are stored row-major with
/// the last axis fastest. Fields are plain values: copies are deep and every
/// arithmetic operation returns a new Field.
class Field {
public:
    Field() = default;

    explicit Field(GridSpec grid) : grid_(grid), values_(grid.size(), 0.0) {}

    Field(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw InvalidArgument("Field: value count does not match grid size");
        }
    }

    /// Samples `fn(x, y)` at every grid point (y = 0 for one-dimensional grids).
    template <typename Fn>
    static Field sample(const GridSpec& grid, Fn&& fn) {
        Field out(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto p = grid.point(i);
            out.values_[i] = fn(p[0], p[1]);
        }
        return out;
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }

    /// Throws NonFiniteField if any sample is NaN or infinite.
    const Field& require_finite(const char* context) const {
        if (!all_finite()) throw NonFiniteField(std::string(context) + ": field has non-finite values");
        return *this;
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    Field& operator+=(const Field& other) {
        check_same_grid(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
        return *this;
    }

    Field& operator-=(const Field& other) {
        check_same_grid(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
        return *this;
    }

    Field& operator*=(double s) noexcept {
        for (double& v : values_) v *= s;
        return *this;
    }

    /// this += s * other
    Field& axpy(double s, const Field& other) {
        check_same_grid(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
        return *this;
    }

    /// Pointwise product.
    Field& operator*=(const Field& other) {
        check_same_grid(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
        return *this;
    }

    template <typename Fn>
    Field map(Fn&& fn) const {
        Field out(grid_);
        for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = fn(values_[i]);
        return out;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(Field a, double s) { return a *= s; }
    friend Field operator*(double s, Field a) { return a *= s; }
    friend Field operator*(Field a, const Field& b) { return a *= b; }
    friend Field operator-(Field a) { return a *= -1.0; }

    void check_same_grid(const Field& other) const {
        if (!(grid_ == other.grid_)) {
            throw GridMismatch("Field arithmetic on different grids: " + grid_.describe() + " vs " +
                               other.grid_.describe());
        }
    }

private:
    GridSpec grid_;
    std::vector<double> values_;
};

/// Maximum pointwise |a - b|.
inline double max_abs_difference(const Field& a, const Field& b) {
    a.check_same_grid(b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Field mirrored through the origin, (Rφ)(x) = φ(-x), using the periodic
/// identification of the grid (index j maps to N - j mod N).
inline Field reflect(const Field& phi) {
    const auto& g = phi.grid();
    const std::size_t n = g.points_per_axis();
    Field out(g);
    auto mirror = [n](std::size_t j) { return (n - j) % n; };
    if (g.dim() == 1) {
        for (std::size_t j = 0; j < n; ++j) out[mirror(j)] = phi[j];
    } else {
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) out[mirror(j) * n + mirror(k)] = phi[j * n + k];
    }
    return out;
}

}  // namespace asymptolab
