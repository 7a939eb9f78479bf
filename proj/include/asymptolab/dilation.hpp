#pragma once

#include <cmath>
#include <vector>

#include "fft.hpp"
#include "field.hpp"

namespace asymptolab {

/// Relative size (against the field maximum) of the data that dilate is
/// allowed to discard when the rescaled support or band leaves the grid.
inline constexpr double kDilateTolerance = 1e-10;

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline Complex chirp(long double theta, long double v) {
    constexpr long double two_pi = 6.283185307179586476925286766559L;
    const long double ang = std::fmod(theta * v * v * 0.5L, two_pi);
    return {static_cast<double>(std::cos(ang)), static_cast<double>(std::sin(ang))};
}

}  // namespace detail

/// Bluestein chirp-z transform:
///   X_j = sum_r a_r exp(i theta (m0 + r)(j0 + j)),  j = 0 .. out_len-1.
inline std::vector<Complex> chirp_z(const std::vector<Complex>& a, long double theta, long m0, long j0,
                                    std::size_t out_len) {
    const std::size_t m = a.size();
    const std::size_t p = detail::next_pow2(m + out_len - 1);
    std::vector<Complex> x(p, Complex(0.0, 0.0)), b(p, Complex(0.0, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
        x[r] = a[r] * detail::chirp(theta, static_cast<long double>(m0 + static_cast<long>(r)));
    }
    const long shift = j0 - m0 - static_cast<long>(m - 1);
    for (std::size_t l = 0; l < m + out_len - 1; ++l) {
        b[l] = std::conj(detail::chirp(theta, static_cast<long double>(static_cast<long>(l) + shift)));
    }
    complex_fft(x, false);
    complex_fft(b, false);
    for (std::size_t i = 0; i < p; ++i) x[i] *= b[i];
    complex_fft(x, true);
    std::vector<Complex> out(out_len);
    const double norm = 1.0 / static_cast<double>(p);
    for (std::size_t j = 0; j < out_len; ++j) {
        out[j] = x[j + m - 1] * norm *
                 detail::chirp(theta, static_cast<long double>(j0 + static_cast<long>(j)));
    }
    return out;
}

namespace detail {

/// Evaluates the trigonometric interpolant of each line of `values` (stride
/// `stride`, `count` lines of length n, spaced by `line_step`) at y_j = s x_j.
inline void dilate_lines(std::vector<double>& values, const GridSpec& g, double s, std::size_t count,
                         std::size_t line_step, std::size_t stride) {
    const std::size_t n = g.points_per_axis();
    const long half = static_cast<long>(n / 2);
    const long double theta = 2.0L * 3.141592653589793238462643383279L * s / static_cast<long double>(n);
    const double L = g.half_width();
    std::vector<Complex> line(n);
    std::vector<Complex> coeff(n + 1);
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t base = c * line_step;
        for (std::size_t j = 0; j < n; ++j) line[j] = values[base + j * stride];
        complex_fft(line, false);
        // Signed coefficients m = -N/2 .. N/2 with the Nyquist term split.
        for (long m = -half; m <= half; ++m) {
            Complex cm = line[static_cast<std::size_t>((m + static_cast<long>(n)) % static_cast<long>(n))];
            if (m == half || m == -half) cm *= 0.5;
            const double phase = GridSpec::kPi * static_cast<double>(m) * (1.0 - s);
            coeff[static_cast<std::size_t>(m + half)] =
                cm * Complex(std::cos(phase), std::sin(phase)) / static_cast<double>(n);
        }
        const auto out = chirp_z(coeff, theta, -half, 0, n);
        for (std::size_t j = 0; j < n; ++j) {
            const double y = s * g.coordinate(j);
            values[base + j * stride] = std::abs(y) >= L ? 0.0 : out[j].real();
        }
    }
}

}  // namespace detail

/// (δ_t φ)(x) = t^{-n/2} φ(t^{-1/2} x), evaluated by band-limited
/// interpolation of φ. Data outside the box is taken to be zero.
inline Field dilate(double t, const Field& phi, double tolerance = kDilateTolerance) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidArgument("dilate: t must be positive");
    if (t == 1.0) return phi;
    const auto& g = phi.grid();
    const double s = 1.0 / std::sqrt(t);
    const double sup = phi.max_abs();
    if (sup == 0.0) return Field(g);
    const double L = g.half_width();
    const std::size_t n = g.points_per_axis();

    if (s < 1.0) {
        // Stretching: φ must vanish where |x| >= sL or the result leaves the box.
        double outside = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto x = g.point(i);
            if (std::max(std::abs(x[0]), std::abs(x[1])) >= s * L) outside = std::max(outside, std::abs(phi[i]));
        }
        if (outside > tolerance * sup) {
            throw ScaleOutOfRange("dilate: support of delta_t phi exceeds the box at t=" + std::to_string(t));
        }
    } else {
        // Compression: the spectrum above Nyquist / s would alias.
        const auto spec = forward(phi);
        double cmax = 0.0, above = 0.0;
        const double cut = g.nyquist() / s;
        for (std::size_t i = 0; i < spec.size(); ++i) {
            const auto k = mode_wavevector(g, i);
            const double a = std::abs(spec[i]);
            cmax = std::max(cmax, a);
            if (std::max(std::abs(k[0]), std::abs(k[1])) > cut) above = std::max(above, a);
        }
        if (above > tolerance * cmax) {
            throw ScaleOutOfRange("dilate: delta_t phi is not resolved on the grid at t=" + std::to_string(t));
        }
    }

    std::vector<double> v(phi.values().begin(), phi.values().end());
    if (g.dim() == 1) {
        detail::dilate_lines(v, g, s, 1, 0, 1);
    } else {
        detail::dilate_lines(v, g, s, n, n, 1);
        detail::dilate_lines(v, g, s, n, 1, n);
    }
    const double amp = g.dim() == 1 ? s : s * s;
    for (double& x : v) x *= amp;
    return Field(g, std::move(v));
}

/// Samples of the continuous Fourier transform Ĥ(scale·ξ_k) at the grid
/// wavenumbers, returned in the grid's FFT convention, so that a field whose
/// continuous transform is ξ -> Ĥ(scale·ξ) has exactly this Spectrum.
/// H is treated as compactly supported in the box.
inline Spectrum scaled_spectrum(const Field& h, double scale) {
    const auto& g = h.grid();
    const std::size_t n = g.points_per_axis();
    const std::size_t half = n / 2 + 1;
    const long double theta = -2.0L * 3.141592653589793238462643383279L * scale / static_cast<long double>(n);
    // Ĥ(ω) ≈ dx Σ_j H_j e^{-iω x_j}; e^{-i scale ξ_k x_j} = e^{i π scale k} e^{i θ k j}.
    auto phase = [&](long k) {
        const double a = GridSpec::kPi * scale * static_cast<double>(k);
        return Complex(std::cos(a), std::sin(a));
    };
    Spectrum out(g);
    if (g.dim() == 1) {
        std::vector<Complex> a(h.values().begin(), h.values().end());
        const auto x = chirp_z(a, theta, 0, 0, half);
        for (std::size_t k = 0; k < half; ++k) {
            // FFT convention: S_k = (-1)^k Ĥ(ξ_k) / dx; the dx factors cancel.
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            out[k] = sign * x[k] * phase(static_cast<long>(k));
        }
        return out;
    }
    // Rows: transform along the last axis to k1 = 0 .. N/2.
    std::vector<Complex> rows(n * half);
    std::vector<Complex> a(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < n; ++j) a[j] = h[r * n + j];
        const auto x = chirp_z(a, theta, 0, 0, half);
        for (std::size_t k = 0; k < half; ++k) rows[r * half + k] = x[k] * phase(static_cast<long>(k));
    }
    // Columns: signed k0 in FFT order.
    const long nh = static_cast<long>(n / 2);
    for (std::size_t c = 0; c < half; ++c) {
        for (std::size_t r = 0; r < n; ++r) a[r] = rows[r * half + c];
        const auto x = chirp_z(a, theta, 0, -nh + 1, n);
        for (std::size_t j = 0; j < n; ++j) {
            const long k0 = -nh + 1 + static_cast<long>(j);
            const std::size_t idx = static_cast<std::size_t>((k0 + static_cast<long>(n)) % static_cast<long>(n));
            const double sign = ((k0 + static_cast<long>(c)) % 2 == 0) ? 1.0 : -1.0;
            out[idx * half + c] = sign * x[j] * phase(k0);
        }
    }
    return out;
}

/// Value of the trigonometric interpolant of φ at an arbitrary point.
inline double interpolate(const Field& phi, std::array<double, 2> x) {
    const auto& g = phi.grid();
    const auto spec = forward(phi);
    const std::size_t n = g.points_per_axis();
    const std::size_t h = n / 2 + 1;
    const double L = g.half_width();
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const auto k = mode_wavevector(g, i);
        const std::size_t last = g.dim() == 1 ? i : i % h;
        const double w = (last == 0 || last == n / 2) ? 1.0 : 2.0;
        double ph = k[0] * (x[0] + L);
        if (g.dim() == 2) ph += k[1] * (x[1] + L);
        // Nyquist modes enter through their cosine part only.
        const bool nyq = last == n / 2 || (g.dim() == 2 && i / h == n / 2);
        acc += nyq ? w * spec[i].real() * std::cos(ph)
                   : w * (spec[i].real() * std::cos(ph) - spec[i].imag() * std::sin(ph));
    }
    return acc / static_cast<double>(g.size());
}

}  // namespace asymptolab
