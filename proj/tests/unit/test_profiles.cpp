#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <cmath>
#include <complex>

#include "asymptolab/dilation.hpp"
#include "asymptolab/profiles.hpp"
#include "asymptolab/solver.hpp"

using namespace asymptolab;

namespace {

ProfileParams params_for(double p, double mass = 1.0) {
    ProfileParams pp;
    pp.f = Nonlinearity::abs_power_signed(p);
    pp.mass = mass;
    return pp;
}

/// Continuous transform of R_{0,1}(t) for n = 1:
///   f(M)(iaξ)(4π)^{-γ} p^{-1/2} t^{1-γ}/(1-γ) e^{-tξ²/p} 1F1(1; 2-γ; -(1-1/p)tξ²).
std::complex<double> r01_transform(double xi, double t, double p, double fM, double a) {
    const double g = 0.5 * (p - 1.0);
    const double z = -(1.0 - 1.0 / p) * t * xi * xi;
    const double amp = fM * std::pow(4.0 * GridSpec::kPi, -g) * std::pow(p, -0.5) * std::pow(t, 1.0 - g) / (1.0 - g) *
                       std::exp(-t * xi * xi / p) * boost::math::hypergeometric_1F1(1.0, 2.0 - g, z);
    return {0.0, a * xi * amp};
}

}  // namespace

TEST(Profiles, R01MatchesKummerClosedForm) {
    const GridSpec g(1, 200.0, 4096);
    for (double p : {2.2, 2.5, 2.75}) {
        ProfileBuilder b(g, params_for(p, 1.3));
        for (double t : {1.0, 37.0, 900.0}) {
            const auto spec = forward(b.remainder_R01(t));
            double peak = 0.0, err = 0.0;
            for (std::size_t k = 1; k < spec.size(); k += 7) {
                const double xi = g.wavenumber(k);
                const double sign = k % 2 == 0 ? 1.0 : -1.0;
                const auto exact = sign * r01_transform(xi, t, p, b.params().f(1.3), 1.0) / g.spacing();
                peak = std::max(peak, std::abs(exact));
                err = std::max(err, std::abs(spec[k] - exact));
            }
            EXPECT_LT(err, 1e-9 * peak) << "p=" << p << " t=" << t;
        }
    }
}

TEST(Profiles, R01IsSelfSimilar) {
    const GridSpec g(1, 64.0, 4096);
    ProfileBuilder b(g, params_for(2.4));
    const double sigma = b.scaling().sigma();
    const auto r1 = b.remainder_R01(1.0);
    for (double t : {4.0, 9.0}) {
        auto pred = dilate(t, r1);
        pred *= std::pow(t, -sigma);
        EXPECT_LT(max_abs_difference(b.remainder_R01(t), pred), 1e-9 * pred.max_abs()) << "t=" << t;
    }
}

TEST(Profiles, RemainderHomogeneousOfDegreeP) {
    const GridSpec g(1, 64.0, 1024);
    const double p = 2.3, lambda = 1.7;
    const auto r = ProfileBuilder(g, params_for(p, 1.0)).remainder_R01(5.0);
    auto scaled = ProfileBuilder(g, params_for(p, lambda)).remainder_R01(5.0);
    scaled *= std::pow(lambda, -p);
    EXPECT_LT(max_abs_difference(scaled, r), 1e-13);
}

TEST(Profiles, ProfilesCarryTheMassAndOddMomentVanishes) {
    const GridSpec g(1, 300.0, 4096);
    ProfileBuilder b(g, params_for(2.2, 0.8));
    EXPECT_NEAR(mass(b.A0(3.0)), 0.8, 1e-12);
    EXPECT_NEAR(mass(b.profile_A0k(1, 100.0)), 0.8, 1e-12);
    EXPECT_NEAR(mass(b.profile_A0k(2, 100.0)), 0.8, 1e-12);
    EXPECT_LT(std::abs(b.odd_moment()), 1e-14);
}

TEST(Profiles, A0kUsesTheSameHeatKernelAsA0) {
    const GridSpec g(1, 200.0, 2048);
    ProfileBuilder b(g, params_for(2.2, 1.1));
    EXPECT_LT(max_abs_difference(b.A0(7.0), gaussian_field(g, 7.0, 1.1)), 1e-15);
    auto d = b.profile_A0k(1, 50.0) - b.A0(50.0);
    EXPECT_LT(max_abs_difference(d, b.remainder_R01(50.0)), 1e-15);
}

// Successive corrections decay at the stratified rates t^{-kσ}.
TEST(Profiles, CorrectionsAreStratified) {
    const GridSpec g(1, 640.0, 8192);
    const double p = 2.4;
    ProfileBuilder b(g, params_for(p));
    const double sigma = b.scaling().sigma();
    auto d2 = [&](double t) { return lq_norm(b.profile_A0k(2, t) - b.profile_A0k(1, t), 1.0); };
    const double t1 = 512.0, t2 = 4096.0;
    const double slope = std::log(d2(t2) / d2(t1)) / std::log(t2 / t1);
    EXPECT_NEAR(slope, -2.0 * sigma, 0.05);
    EXPECT_LT(d2(t2), lq_norm(b.remainder_R01(t2), 1.0));
}

TEST(Profiles, RangeChecks) {
    const GridSpec g(1, 64.0, 512);
    ProfileBuilder b(g, params_for(3.0));
    EXPECT_THROW(b.profile_A0k(1, 4.0), RangeViolation);
    EXPECT_NO_THROW(b.profile_A0k(0, 4.0));
    auto pp = params_for(3.0);
    pp.override_range = true;
    EXPECT_THROW(ProfileBuilder(g, pp).profile_A0k(1, 4.0), RangeViolation);
    pp = params_for(1.9);
    EXPECT_THROW(ProfileBuilder(g, pp).profile_A0k(1, 4.0), RangeViolation);
    pp.override_range = true;
    EXPECT_NO_THROW(ProfileBuilder(g, pp).profile_A0k(1, 4.0));

    ProfileBuilder noncritical(g, params_for(2.5));
    EXPECT_THROW(noncritical.profile_tildeA(1, 4.0), RangeViolation);
    EXPECT_THROW(ProfileBuilder(g, params_for(1.5)).profile_A0k(1, 4.0), RangeViolation);
    auto low = params_for(2.2);
    low.nodes_per_panel = 4;
    EXPECT_THROW(ProfileBuilder(g, low), InvalidArgument);
}

TEST(Profiles, TildeACoefficientGrowsLogarithmically) {
    const GridSpec g(1, 640.0, 8192);
    const double p = 3.0;
    ProfileBuilder b(g, params_for(p, 1.2));
    const double fM = b.params().f(1.2);
    const double rate = fM / (4.0 * GridSpec::kPi) / std::sqrt(p);
    for (double t : {8.0, 512.0}) {
        EXPECT_NEAR(b.tildeA_integral(0, t), rate * std::log(t), 1e-9 * rate * std::log(t)) << "t=" << t;
    }
    const double t = 64.0;
    auto shape = b.profile_tildeA(1, t) - b.A0(t);
    auto expected = b.convection_mode(t);
    expected *= -0.5 * rate * std::log(t) / std::sqrt(t);
    EXPECT_LT(max_abs_difference(shape, expected), 1e-9 * expected.max_abs());
}

TEST(Profiles, TildeR01Constant) {
    const GridSpec g(1, 40.0, 1024);
    const auto r = star_shape(StarShape::TildeR01, g, params_for(2.2));
    const std::size_t i = 512 + 20;
    const double x = g.coordinate(i);
    const double ratio = r[i] / (x * gauss_value(1, 1.0, x * x));
    EXPECT_NEAR(ratio, -1.0 / (8.0 * GridSpec::kPi * std::sqrt(3.0)), 1e-12);
    EXPECT_NEAR(ratio, -0.0229731, 2e-6);
}

TEST(Profiles, S01MatchesUnitTimeRemainder) {
    const GridSpec g(1, 40.0, 1024);
    auto pp = params_for(2.5, 2.0);
    const auto s01 = star_shape(StarShape::S01, g, pp);
    const auto r = ProfileBuilder(g, params_for(2.5, 1.0)).remainder_R01(1.0);
    EXPECT_LT(max_abs_difference(s01, r), 1e-14);
}

// S_{0,1}(x) = -(1/2) p^{-1/2} (a x) ∫_0^1 (4πθ)^{-(p-1)/2} G_T(x) / T dθ with T = 1 - θ + θ/p,
// integrated pointwise by tanh-sinh against the band-limited interpolant.
TEST(Profiles, S01MatchesPointwiseThetaIntegral) {
    const GridSpec g(1, 32.0, 2048);
    boost::math::quadrature::tanh_sinh<double> ts;
    for (double p : {2.2, 2.5, 2.8}) {
        auto pp = params_for(p);
        pp.a = {1.3, 0.0};
        const auto s01 = star_shape(StarShape::S01, g, pp);
        for (double x : {-2.0, 0.4, 1.0, 1.3, 3.7}) {
            const double integral = ts.integrate([&](double th) {
                const double T = 1.0 - th + th / p;
                return std::pow(4.0 * GridSpec::kPi * th, -0.5 * (p - 1.0)) * gauss_value(1, T, x * x) / T;
            }, 0.0, 1.0);
            const double expect = -0.5 / std::sqrt(p) * 1.3 * x * integral;
            EXPECT_NEAR(interpolate(s01, {x, 0.0}), expect, 1e-8 * std::abs(expect) + 1e-12) << "p=" << p << " x=" << x;
        }
        EXPECT_LT(interpolate(s01, {1.3, 0.0}), 0.0);
    }
}

TEST(Profiles, FirstOrderShapeVanishesWithItsCoefficients) {
    const GridSpec g(1, 200.0, 4096);
    auto pp = params_for(4.0);
    ProfileBuilder b(g, pp);
    PsiIntegral psi;
    psi.k = 0;
    psi.value = Field(g);
    for (double t : {1.0, 8.0}) {
        EXPECT_EQ(lq_norm(b.profile_A1k(0, t, psi) - b.profile_A0k(0, t), 1.0), 0.0);
    }
    pp.first_moments = {0.25, 0.0};
    ProfileBuilder shifted(g, pp);
    const auto d = shifted.profile_A1k(0, 4.0, psi) - shifted.profile_A0k(0, 4.0);
    auto expect = first_mode(g, 0, 4.0);
    expect *= 0.5 * 0.25 / 2.0;
    EXPECT_LT(max_abs_difference(d, expect), 1e-15);
}

// Ŝ*_{0,2}(ξ) at a few wavenumbers, with Ĥ by a direct sum and the θ-integral
// by the substitution θ = u^{1/(1-γ)}, which removes the endpoint singularity.
TEST(Profiles, S02MatchesDirectEvaluation) {
    const GridSpec g(1, 40.0, 1024);
    const double p = 2.3;
    auto pp = params_for(p);
    const auto s02 = star_shape(StarShape::S02, g, pp);
    const auto spec = forward(s02);
    const auto s01 = star_shape(StarShape::S01, g, pp);
    std::vector<double> H(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.coordinate(j);
        H[j] = std::pow(gauss_value(1, 1.0, x * x), p - 1.0) * s01[j];
    }
    auto H_hat = [&](double w) {
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) acc += H[j] * std::exp(std::complex<double>(0.0, -w * g.coordinate(j)));
        return acc * g.spacing();
    };
    const double sigma = 0.5 * (p - 1.0) - 0.5;
    const double gam = 0.5 + 2.0 * sigma;
    const auto rule = composite({0.0, 0.25, 0.5, 0.75, 1.0}, 24);
    double peak = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) peak = std::max(peak, std::abs(spec[k]));
    for (std::size_t k : {3u, 11u, 25u, 60u}) {
        const double xi = g.wavenumber(k);
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double u = rule.nodes[i];
            const double theta = std::pow(u, 1.0 / (1.0 - gam));
            acc += rule.weights[i] / (1.0 - gam) * std::exp(-(1.0 - theta) * xi * xi) * H_hat(std::sqrt(theta) * xi);
        }
        acc *= std::complex<double>(0.0, xi);
        const double sign = k % 2 == 0 ? 1.0 : -1.0;
        EXPECT_LT(std::abs(spec[k] - sign * acc / g.spacing()), 1e-8 * peak) << "k=" << k;
    }
    auto r02 = star_shape(StarShape::R02, g, params_for(p, 1.5));
    const double c = std::pow(1.5, p) * p * std::pow(1.5, p - 1.0);
    r02 *= 1.0 / c;
    EXPECT_LT(max_abs_difference(r02, s02), 1e-14);
    EXPECT_THROW(star_shape(StarShape::S02, g, params_for(2.6)), RangeViolation);
}

TEST(Profiles, BurgersWaveMassAndShape) {
    const GridSpec g(1, 200.0, 4096);
    for (double M : {0.5, 2.0}) {
        const auto chi = burgers_wave(g, 10.0, M, 1.0);
        EXPECT_NEAR(mass(chi), M, 1e-10);
        for (std::size_t i = 0; i < g.size(); ++i) ASSERT_GE(chi[i], 0.0);
    }
    const auto small = burgers_wave(g, 10.0, 1e-6, 1.0);
    auto heat = gaussian_field(g, 10.0, 1e-6);
    EXPECT_LT(max_abs_difference(small, heat), 1e-11);
    EXPECT_THROW(burgers_wave(GridSpec(2, 10.0, 32), 1.0, 1.0, 1.0), InvalidArgument);
}

TEST(Profiles, GenericDuhamelMatchesSpectralRemainder) {
    const GridSpec g(1, 200.0, 2048);
    ProfileBuilder b(g, params_for(2.2));
    const double t = 40.0;
    const auto& f = b.params().f;
    auto integrand = [&](double s) { return f.apply(b.A0(s)); };
    const auto d = duhamel(g, t, integrand, 1.0, t, {1.0, 0.0}, true);
    auto expected = b.remainder_R01(t) - heat_apply(t - 1.0, MultiIndex::zero(1), b.remainder_R01(1.0));
    EXPECT_LT(max_abs_difference(d, expected), 1e-9 * expected.max_abs());
    EXPECT_THROW(duhamel(g, t, integrand, 1.0, t, {1.0, 0.0}, false, 8, 1e-300), QuadratureBudgetExceeded);
}

// M_{e_1}(u(S)) - M_{e_1}(u_0) = -a ∫_0^S M_0(f(u)) ds gives the mass of ψ_{0,0}.
TEST(Profiles, PsiMassMatchesFirstMomentTransfer) {
    const GridSpec g(1, 400.0, 4096);
    const double p = 4.0, S = 64.0;
    auto pp = params_for(p, 1.5);
    ProfileBuilder b(g, pp);
    SolverConfig cfg;
    cfg.grid = g;
    cfg.nonlinearity = pp.f;
    cfg.initial_data = InitialData::gaussian(1.5, 1.0);
    const double S_long = 1024.0;
    cfg.t_end = S_long;
    cfg.sample_times = b.psi_node_times(S);
    cfg.sample_times.push_back(S);
    cfg.sample_times.push_back(S_long);
    cfg.step.rtol = 1e-11;
    const auto traj = solve(cfg);
    const auto psi = b.compute_psi(0, traj, S);
    const double transfer = -(moment(MultiIndex(1), traj.at(S)) - moment(MultiIndex(1), traj.initial));
    EXPECT_NEAR(mass(psi.value), transfer, 1e-8 * std::abs(transfer));
    EXPECT_GT(psi.tail_bound, 0.0);
    EXPECT_GT(psi.tail_mass, 0.0);
    // The extrapolated tail predicts the transfer over [S, 16 S] plus its own remainder.
    const double later = -(moment(MultiIndex(1), traj.at(S_long)) - moment(MultiIndex(1), traj.at(S)));
    EXPECT_NEAR(psi.tail_mass * (1.0 - std::pow(16.0, -0.5)), later, 0.02 * later);
    EXPECT_THROW(b.compute_psi(0, traj, S, 1e-12), TailBudgetExceeded);

    // A_{1,0} - A_0 is the first-order Hermite mode with coefficient (M_e(u_0) - M_0(ψ))/2.
    pp.first_moments = {0.0, 0.0};
    const double t = 100.0;
    const auto shape = b.profile_A1k(0, t, psi) - b.A0(t);
    auto expected = first_mode(g, 0, t);
    expected *= -0.5 * psi.mass_estimate() / std::sqrt(t);
    EXPECT_LT(max_abs_difference(shape, expected), 1e-12 * expected.max_abs());
}

TEST(Profiles, PsiRequiresTrajectoryAtNodes) {
    const GridSpec g(1, 100.0, 1024);
    ProfileBuilder b(g, params_for(4.0));
    SolverConfig cfg;
    cfg.grid = g;
    cfg.nonlinearity = b.params().f;
    cfg.initial_data = InitialData::gaussian(1.0, 1.0);
    cfg.t_end = 8.0;
    const auto traj = solve(cfg);
    EXPECT_THROW(b.compute_psi(0, traj, 8.0), InvalidArgument);
}
