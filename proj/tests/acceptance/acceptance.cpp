// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <iostream>
#include <sstream>

#include "asymptolab/experiments.hpp"

using namespace asymptolab;

namespace {

nlohmann::json config(const std::string& name, const std::string& scenario, double p, double mass, double center,
                      int k) {
    return {{"schema_version", 1},
            {"name", name},
            {"scenario", scenario},
            {"physics",
             {{"n", 1},
              {"p", p},
              {"f", "abs_power_signed"},
              {"a", {1.0}},
              {"initial", {{"kind", "gaussian"}, {"mass", mass}, {"width", 1.0}, {"center", {center}}}}}},
            {"numerics",
             {{"grid", {{"half_width", 640.0}, {"points", 8192}}},
              {"unit_grid", {{"half_width", 40.0}, {"points", 2048}}},
              {"t_end", 8192},
              {"rtol", 1e-9}}},
            {"analysis", {{"k", k}, {"q_list", {1, "inf"}}, {"fit_window", {64, 8192}}, {"delta", 0.15}}}};
}

struct Line {
    bool pass = true;
    std::ostringstream detail;

    void absorb(const ExperimentResult& r, const std::string& tag) {
        for (const auto& c : r.checks) {
            if (!c.pass) pass = false;
            detail << "\n    " << (c.pass ? "ok   " : "FAIL ") << tag << ": " << c.name << " [" << c.detail << "]";
        }
    }
    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << "\n    " << (ok ? "ok   " : "FAIL ") << what;
    }
};

int failures = 0;

void report(int id, const std::string& title, Line& line, double seconds) {
    if (!line.pass) ++failures;
    std::cout << (line.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " ("
              << detail::fmt(seconds, 3) << " s)" << line.detail.str() << std::endl;
}

template <typename Fn>
void criterion(int id, const std::string& title, Fn&& body) {
    const auto start = std::chrono::steady_clock::now();
    Line line;
    try {
        body(line);
    } catch (const Error& e) {
        line.check(false, "[" + e.module() + "] " + e.what());
    } catch (const std::exception& e) {
        line.check(false, e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(id, title, line, s);
}

ExperimentResult run(const nlohmann::json& doc) { return run_experiment(parse_config(doc)); }

}  // namespace

int main() {
    criterion(1, "Hermite orthogonality and kernel derivative identity", [](Line& l) {
        for (int n : {1, 2}) {
            const double orth = detail::hermite_orthogonality_defect(n, 3);
            const double ident = detail::kernel_derivative_defect(n, 3);
            l.check(orth <= 1e-8, "n=" + std::to_string(n) + " orthogonality defect " + detail::fmt(orth, 3));
            l.check(ident <= 1e-8, "n=" + std::to_string(n) + " derivative identity defect " + detail::fmt(ident, 3));
        }
    });

    criterion(2, "heat expansion error bound holds with nonnegative margin", [](Line& l) {
        auto d = config("heat", "heat_expansion_prop33", 2.0, 1.0, 1.0, 0);
        d["numerics"]["grid"] = {{"half_width", 100.0}, {"points", 2048}};
        d["numerics"]["t_end"] = 64;
        d["analysis"].erase("fit_window");
        d["analysis"]["q_list"] = {1, 2, "inf"};
        const auto r = run(d);
        for (const auto& c : r.checks) {
            if (c.name.rfind("heat expansion bound", 0) == 0) l.check(c.pass, c.name + " [" + c.detail + "]");
        }
    });

    criterion(3, "mass conservation to t=2^13 and heat self-test", [](Line& l) {
        auto d = config("mass", "rate_table_k", 2.2, 1.0, 0.0, 1);
        auto c = parse_config(d);
        SolverConfig s;
        s.grid = c.grid();
        s.nonlinearity = c.nonlinearity();
        s.initial_data = InitialData::gaussian(1.0, 1.0);
        s.t_end = 8192.0;
        s.sample_times = detail::dyadic_times(8192.0);
        const auto traj = solve(s);
        const double drift = traj.max_mass_drift() / std::abs(traj.conserved_mass);
        l.check(drift <= 1e-9, "relative mass drift " + detail::fmt(drift, 3));
        SolverConfig h = s;
        h.a = {0.0, 0.0};
        h.self_test = true;
        const auto heat = solve(h);
        double worst = 0.0;
        for (std::size_t i = 0; i < heat.times.size(); ++i) {
            const auto exact = heat_apply(heat.times[i], MultiIndex::zero(1), heat.initial);
            worst = std::max(worst, max_abs_difference(heat.samples[i], exact));
        }
        l.check(worst <= 1e-8, "a=0 self-test max |u - e^{tΔ}u0| " + detail::fmt(worst, 3));
    });

    criterion(4, "rate table n=1, k=1: p=2.2, 2.5, 2.75", [](Line& l) {
        for (double p : {2.2, 2.5, 2.75}) {
            const auto r = run(config("rate", "rate_table_k", p, 2.0, 0.0, 1));
            l.absorb(r, "p=" + detail::fmt(p));
        }
    });

    criterion(5, "first-order optimality constant, zeroth-order supercritical branch", [](Line& l) {
        const auto r = run(config("b3", "optimality_T2.4", 4.0, 1.0, 1.0, 0));
        l.absorb(r, "p=4 k=0");
        for (const auto& n : r.notes) l.detail << "\n    info " << n;
    });

    criterion(6, "second-order constant at p=2.2 and sign of the star shapes", [](Line& l) {
        const auto r = run(config("t25", "optimality_T2.5", 2.2, 1.0, 0.0, 1));
        l.absorb(r, "p=2.2");
    });

    criterion(7, "no logarithm at p=2.5", [](Line& l) {
        const auto r = run(config("t26", "nonoptimality_T2.6", 2.5, 2.0, 0.0, 1));
        l.absorb(r, "p=2.5");
    });

    criterion(8, "critical log profile against its closed form", [](Line& l) {
        ProfileParams pp;
        pp.f = Nonlinearity::abs_power_signed(3.0);
        pp.mass = 1.0;
        const ProfileBuilder b(GridSpec(1, 640.0, 8192), pp);
        for (double t : {4.0, 16.0}) {
            const double gap = detail::closed_form_log_gap(b, t);
            l.check(gap <= 1e-6, "t=" + detail::fmt(t) + " L1 gap " + detail::fmt(gap, 3));
        }
        const double c = lq_norm(star_shape(StarShape::TildeR01, GridSpec(1, 40.0, 2048), pp), 1.0);
        const double expect = 1.0 / (8.0 * GridSpec::kPi * std::sqrt(3.0)) * lq_norm(first_mode(GridSpec(1, 40.0, 2048), 0, 1.0), 1.0);
        l.check(std::abs(c - expect) <= 1e-12, "||R~*_{0,1}||_1 = " + detail::fmt(c, 10));
    });

    criterion(9, "convergence to the nonlinear diffusion wave", [](Line& l) {
        auto d = config("burgers", "burgers_wave", 2.0, 1.0, 0.0, 1);
        d["physics"]["f"] = "integer_power";
        d["numerics"]["t_end"] = 1024;
        d["analysis"]["fit_window"] = {16, 1024};
        l.absorb(run(d), "M=1");
    });

    criterion(10, "self-similarity identities at t=4, 16, 64", [](Line& l) {
        for (double p : {2.2, 2.75}) {
            auto pp = parse_config(config("ss", "zeroth_order_appendixB", p, 1.0, 1.0, 0)).profile_params();
            const ProfileBuilder b(GridSpec(1, 640.0, 8192), pp);
            const double sigma = b.scaling().sigma();
            const auto r1 = b.remainder_R01(1.0);
            for (double t : {4.0, 16.0, 64.0}) {
                auto rhs = dilate(t, r1);
                rhs *= std::pow(t, -sigma);
                const double e = lq_norm(b.remainder_R01(t) - rhs, 1.0);
                l.check(e <= 1e-6, "p=" + detail::fmt(p) + " R_{0,1} t=" + detail::fmt(t) + " L1 " + detail::fmt(e, 3));
            }
        }
        const auto cfg = parse_config(config("ss1", "optimality_T2.4", 2.75, 1.0, 1.0, 1));
        const ProfileBuilder b(cfg.grid(), cfg.profile_params());
        SolverConfig s = detail::solver_config(cfg, detail::merge_times({64.0}, b.psi_node_times(64.0)));
        s.t_end = 64.0;
        const auto traj = solve(s);
        const auto psi = b.compute_psi(1, traj, 64.0);
        const auto shape1 = b.profile_A1k(1, 1.0, psi) - b.profile_A0k(1, 1.0);
        for (double t : {4.0, 16.0, 64.0}) {
            auto rhs = dilate(t, shape1);
            rhs *= 1.0 / std::sqrt(t);
            const double e = lq_norm(b.profile_A1k(1, t, psi) - b.profile_A0k(1, t) - rhs, 1.0);
            l.check(e <= 1e-6, "A_{1,1} - A_{0,1} t=" + detail::fmt(t) + " L1 " + detail::fmt(e, 3));
        }
    });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
