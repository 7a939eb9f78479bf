#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "field.hpp"

namespace asymptolab {

using Complex = std::complex<double>;

/// Half-complex spectrum of a real Field, laid out as FFTW's r2c output:
/// N/2+1 entries in 1D and N x (N/2+1) in 2D (last axis halved).
class Spectrum {
public:
    Spectrum() = default;
    explicit Spectrum(GridSpec grid) : grid_(grid), data_(mode_count(grid), Complex(0.0, 0.0)) {}

    static std::size_t mode_count(const GridSpec& g) {
        const std::size_t h = g.points_per_axis() / 2 + 1;
        return g.dim() == 1 ? h : g.points_per_axis() * h;
    }

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return data_.size(); }
    Complex& operator[](std::size_t i) noexcept { return data_[i]; }
    const Complex& operator[](std::size_t i) const noexcept { return data_[i]; }
    Complex* data() noexcept { return data_.data(); }
    const Complex* data() const noexcept { return data_.data(); }

    Spectrum& operator+=(const Spectrum& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Spectrum& axpy(double s, const Spectrum& o) {
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
        return *this;
    }
    Spectrum& operator*=(double s) {
        for (auto& c : data_) c *= s;
        return *this;
    }

private:
    GridSpec grid_;
    std::vector<Complex> data_;
};

/// Wavevector of half-spectrum entry `i`. Index layout matches Spectrum.
inline std::array<double, 2> mode_wavevector(const GridSpec& g, std::size_t i) noexcept {
    const std::size_t h = g.points_per_axis() / 2 + 1;
    if (g.dim() == 1) return {g.wavenumber(i), 0.0};
    return {g.wavenumber(i / h), g.wavenumber(i % h)};
}

/// |ξ|^2 for every half-spectrum entry.
inline std::vector<double> mode_norm2(const GridSpec& g) {
    std::vector<double> out(Spectrum::mode_count(g));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto k = mode_wavevector(g, i);
        out[i] = k[0] * k[0] + k[1] * k[1];
    }
    return out;
}

namespace detail {

/// Process-wide FFTW plan cache. Planning is serialized; execution through
/// the new-array interface is reentrant.
class PlanCache {
public:
    enum class Kind { R2C, C2R, CForward, CBackward };

    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(Kind kind, int dim, int n) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_tuple(kind, dim, n);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        const std::size_t total = dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
        const std::size_t half = dim == 1 ? static_cast<std::size_t>(n / 2 + 1)
                                          : static_cast<std::size_t>(n) * (n / 2 + 1);
        auto* real = fftw_alloc_real(total);
        auto* cplx = fftw_alloc_complex(std::max(total, half));
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan plan = nullptr;
        switch (kind) {
            case Kind::R2C:
                plan = dim == 1 ? fftw_plan_dft_r2c_1d(n, real, cplx, flags)
                                : fftw_plan_dft_r2c_2d(n, n, real, cplx, flags);
                break;
            case Kind::C2R:
                plan = dim == 1 ? fftw_plan_dft_c2r_1d(n, cplx, real, flags)
                                : fftw_plan_dft_c2r_2d(n, n, cplx, real, flags);
                break;
            case Kind::CForward:
                plan = fftw_plan_dft_1d(n, cplx, cplx, FFTW_FORWARD, flags);
                break;
            case Kind::CBackward:
                plan = fftw_plan_dft_1d(n, cplx, cplx, FFTW_BACKWARD, flags);
                break;
        }
        fftw_free(real);
        fftw_free(cplx);
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<std::tuple<Kind, int, int>, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(Complex* p) noexcept { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Unnormalized forward transform of a real field.
inline Spectrum forward(const Field& phi) {
    const auto& g = phi.grid();
    Spectrum out(g);
    std::vector<double> in(phi.values().begin(), phi.values().end());
    auto plan = detail::PlanCache::instance().get(detail::PlanCache::Kind::R2C, g.dim(),
                                                  static_cast<int>(g.points_per_axis()));
    fftw_execute_dft_r2c(plan, in.data(), detail::as_fftw(out.data()));
    return out;
}

/// Inverse transform including the 1/N^n normalization.
inline Field inverse(const Spectrum& s) {
    const auto& g = s.grid();
    std::vector<Complex> in(s.data(), s.data() + s.size());
    std::vector<double> values(g.size());
    auto plan = detail::PlanCache::instance().get(detail::PlanCache::Kind::C2R, g.dim(),
                                                  static_cast<int>(g.points_per_axis()));
    fftw_execute_dft_c2r(plan, detail::as_fftw(in.data()), values.data());
    const double scale = 1.0 / static_cast<double>(g.size());
    for (double& v : values) v *= scale;
    return Field(g, std::move(values));
}

/// In-place unnormalized complex 1D transform of length n (a power of two).
inline void complex_fft(std::vector<Complex>& data, bool backward) {
    auto plan = detail::PlanCache::instance().get(
        backward ? detail::PlanCache::Kind::CBackward : detail::PlanCache::Kind::CForward, 1,
        static_cast<int>(data.size()));
    fftw_execute_dft(plan, detail::as_fftw(data.data()), detail::as_fftw(data.data()));
}

}  // namespace asymptolab
