#include <gtest/gtest.h>

#include <cmath>

#include "asymptolab/profiles.hpp"
#include "asymptolab/solver.hpp"

using namespace asymptolab;

namespace {

SolverConfig base_config(const GridSpec& g, double p, double t_end) {
    SolverConfig cfg;
    cfg.grid = g;
    cfg.nonlinearity = Nonlinearity::abs_power_signed(p);
    cfg.initial_data = InitialData::gaussian(1.0, 1.0);
    cfg.t_end = t_end;
    return cfg;
}

}  // namespace

TEST(Solver, ZeroDataStaysZero) {
    auto cfg = base_config(GridSpec(1, 40.0, 256), 2.0, 10.0);
    cfg.initial_data = InitialData::gaussian(0.0, 1.0);
    cfg.sample_times = {1.0, 5.0};
    const auto traj = solve(cfg);
    for (const auto& s : traj.samples) EXPECT_EQ(s.max_abs(), 0.0);
}

TEST(Solver, HeatSelfTestMatchesExactKernel) {
    const GridSpec g(1, 80.0, 1024);
    auto cfg = base_config(g, 2.0, 20.0);
    cfg.a = {0.0, 0.0};
    cfg.self_test = true;
    cfg.sample_times = {0.5, 4.0, 20.0};
    const auto traj = solve(cfg);
    for (double t : cfg.sample_times) {
        const auto exact = gaussian_field(g, 1.0 + t, 1.0);
        EXPECT_LT(max_abs_difference(traj.at(t), exact), 1e-8) << "t=" << t;
    }
}

TEST(Solver, HeatSelfTestAgreesWithPropagator2D) {
    const GridSpec g(2, 20.0, 64);
    SolverConfig cfg;
    cfg.grid = g;
    cfg.a = {0.0, 0.0};
    cfg.self_test = true;
    cfg.initial_data = InitialData::gaussian(2.0, 1.5, {1.0, -0.5});
    cfg.t_end = 3.0;
    const auto traj = solve(cfg);
    const auto expected = heat_apply(3.0, MultiIndex::zero(2), traj.initial);
    EXPECT_LT(max_abs_difference(traj.at(3.0), expected), 1e-8);
}

TEST(Solver, ZeroConvectionRequiresSelfTest) {
    auto cfg = base_config(GridSpec(1, 40.0, 256), 2.0, 1.0);
    cfg.a = {0.0, 0.0};
    EXPECT_THROW(solve(cfg), InvalidArgument);
}

TEST(Solver, RejectsBadSampleTimesAndFilters) {
    auto cfg = base_config(GridSpec(1, 40.0, 256), 2.2, 4.0);
    cfg.sample_times = {2.0, 1.0};
    EXPECT_THROW(solve(cfg), InvalidArgument);
    cfg.sample_times = {5.0};
    EXPECT_THROW(solve(cfg), InvalidArgument);
    cfg.sample_times = {};
    cfg.dealias = true;
    EXPECT_THROW(solve(cfg), InvalidArgument);
}

TEST(Solver, ConservesMass) {
    auto cfg = base_config(GridSpec(1, 200.0, 2048), 2.2, 256.0);
    cfg.sample_times = {1.0, 16.0, 256.0};
    const auto traj = solve(cfg);
    EXPECT_NEAR(traj.conserved_mass, 1.0, 1e-12);
    EXPECT_LT(traj.max_mass_drift(), 1e-9);
    EXPECT_GT(traj.accepted_steps, 0u);
}

TEST(Solver, ConservesMass2D) {
    SolverConfig cfg;
    cfg.grid = GridSpec(2, 24.0, 128);
    cfg.nonlinearity = Nonlinearity::abs_power_signed(1.8);
    cfg.a = {1.0, 0.5};
    cfg.initial_data = InitialData::gaussian(1.0, 1.0);
    cfg.t_end = 4.0;
    const auto traj = solve(cfg);
    EXPECT_LT(traj.max_mass_drift(), 1e-9);
}

TEST(Solver, TranslatedDataCarriesFirstMoment) {
    const GridSpec g(1, 60.0, 1024);
    const auto u0 = InitialData::gaussian(2.0, 1.0, {1.5, 0.0}).sample(g);
    EXPECT_NEAR(mass(u0), 2.0, 1e-12);
    EXPECT_NEAR(moment(MultiIndex(1), u0), 3.0, 1e-10);
}

// The viscous Burgers diffusion wave is an exact solution: starting from χ_1
// the trajectory is χ_{1+t}.
TEST(Solver, BurgersWaveIsExactSolution) {
    const GridSpec g(1, 120.0, 2048);
    SolverConfig cfg;
    cfg.grid = g;
    cfg.nonlinearity = Nonlinearity::integer_power(2);
    cfg.a = {1.0, 0.0};
    cfg.initial_data = InitialData::explicit_samples(burgers_wave(g, 1.0, 1.5, 1.0));
    cfg.t_end = 50.0;
    cfg.sample_times = {3.0, 50.0};
    const auto traj = solve(cfg);
    for (double t : cfg.sample_times) {
        const auto exact = burgers_wave(g, 1.0 + t, 1.5, 1.0);
        EXPECT_LT(lq_norm(traj.at(t) - exact, 1.0), 1e-7) << "t=" << t;
    }
}

TEST(Solver, GaussianDataApproachesBurgersWave) {
    const GridSpec g(1, 400.0, 4096);
    SolverConfig cfg;
    cfg.grid = g;
    cfg.nonlinearity = Nonlinearity::integer_power(2);
    cfg.initial_data = InitialData::gaussian(1.0, 1.0);
    cfg.t_end = 1024.0;
    cfg.sample_times = {16.0, 64.0, 256.0, 1024.0};
    const auto traj = solve(cfg);
    double prev = 1e300;
    for (double t : cfg.sample_times) {
        const double err = lq_norm(traj.at(t) - burgers_wave(g, t, 1.0, 1.0), 1.0);
        EXPECT_LT(err, prev) << "t=" << t;
        prev = err;
    }
    EXPECT_LT(prev, 0.05);
}

// The nonlinear correction is O(ε^p) for data of size ε.
TEST(Solver, SmallAmplitudeCorrectionScalesLikePowerP) {
    const GridSpec g(1, 40.0, 512);
    const double p = 2.5;
    auto correction = [&](double eps) {
        auto cfg = base_config(g, p, 1.0);
        cfg.initial_data = InitialData::gaussian(eps, 1.0);
        cfg.step.rtol = 1e-12;
        const auto traj = solve(cfg);
        return lq_norm(traj.at(1.0) - gaussian_field(g, 2.0, eps), 1.0);
    };
    const double c1 = correction(1e-2), c2 = correction(1e-3);
    const double slope = std::log(c1 / c2) / std::log(10.0);
    EXPECT_NEAR(slope, p, 0.02);
}

TEST(Solver, SelfConvergenceInTolerance) {
    const GridSpec g(1, 100.0, 1024);
    auto run = [&](double rtol) {
        auto cfg = base_config(g, 2.2, 64.0);
        cfg.initial_data = InitialData::gaussian(3.0, 1.0);
        cfg.step.rtol = rtol;
        cfg.step.growth = 0.5;
        return solve(cfg).at(64.0);
    };
    const auto ref = run(1e-12);
    const double e1 = lq_norm(run(1e-5) - ref, 1.0);
    const double e2 = lq_norm(run(1e-8) - ref, 1.0);
    EXPECT_LT(e2, e1 + 1e-14);
    EXPECT_LT(e2, 1e-8);
}

TEST(Solver, BoxExhaustedWhenSolutionReachesBoundary) {
    auto cfg = base_config(GridSpec(1, 8.0, 128), 2.0, 200.0);
    EXPECT_THROW(solve(cfg), BoxExhausted);
}

TEST(Solver, DecayEnvelopeMatchesHeatLimit) {
    const GridSpec g(1, 300.0, 2048);
    auto cfg = base_config(g, 2.0, 1000.0);
    cfg.a = {0.0, 0.0};
    cfg.self_test = true;
    cfg.sample_times = {1.0, 10.0, 100.0, 1000.0};
    const auto traj = solve(cfg);
    const auto env = decay_envelope(traj, {1.0, 2.0, kInf});
    ASSERT_EQ(env.rows.size(), 12u);
    // t^{1/2} ||G_{1+t}||_∞ increases to (4π)^{-1/2}.
    const double limit = 1.0 / std::sqrt(4.0 * GridSpec::kPi);
    EXPECT_NEAR(env.rows.back().value, limit * std::sqrt(1000.0 / 1001.0), 1e-9);
    EXPECT_NEAR(env.rows.back().running_sup, env.rows.back().value, 1e-15);
    // Positive solutions keep ||u||_1 = M, which dominates the other rows here.
    EXPECT_NEAR(env.rows.front().value, 1.0, 1e-10);
    EXPECT_NEAR(env.empirical_constant(), 1.0, 1e-10);
}

TEST(Solver, DecayEnvelopeBoundedWithConvection) {
    const GridSpec g(1, 300.0, 2048);
    auto cfg = base_config(g, 2.5, 1000.0);
    cfg.initial_data = InitialData::gaussian(2.0, 1.0);
    cfg.sample_times = {1.0, 10.0, 100.0, 1000.0};
    const auto env = decay_envelope(solve(cfg), {1.0, 4.0, kInf});
    EXPECT_NEAR(env.empirical_constant(), 1.0, 1e-9);
    for (const auto& r : env.rows) {
        if (std::isinf(r.q)) {
            EXPECT_LT(r.value, 2.0 / std::sqrt(4.0 * GridSpec::kPi)) << "t=" << r.t;
        }
    }
}
