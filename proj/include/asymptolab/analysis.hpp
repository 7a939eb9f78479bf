#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "norms.hpp"
#include "parallel.hpp"
#include "profiles.hpp"
#include "solver.hpp"

namespace asymptolab {

/// ||u(t) - profile(t)||_q at a list of times, with t^{(n/2)(1-1/q)} normalization.
struct RemainderCurve {
    double q = 1.0;
    int dim = 1;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> normalized;
};

enum class FitModel {
    PurePower,         ///< log y = log c + slope log t
    PowerTimesLog,     ///< log y = log c + slope log t + log log t
    PowerTimesFreeLog  ///< log y = log c + slope log t + γ log log t
};

inline std::string model_name(FitModel m) {
    switch (m) {
        case FitModel::PurePower: return "pure_power";
        case FitModel::PowerTimesLog: return "power_times_log";
        case FitModel::PowerTimesFreeLog: return "power_times_free_log";
    }
    return "?";
}

struct DecayFit {
    FitModel model = FitModel::PurePower;
    double slope = 0.0;
    double slope_se = 0.0;
    double prefactor = 0.0;
    double log_coefficient = 0.0;     ///< γ (1 for power_times_log, 0 for pure_power)
    double log_coefficient_se = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t points = 0;
    double residual = 0.0;            ///< RMS of log residuals
};

/// Remainders of `traj` against `profile` for every q at every time.
inline std::vector<RemainderCurve> measure_remainder(const Trajectory& traj,
                                                     const std::function<Field(double)>& profile,
                                                     const std::vector<double>& q_list,
                                                     const std::vector<double>& times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && !(times[i] > times[i - 1])) throw InvalidArgument("measure_remainder: times must increase");
        if (!traj.has(times[i])) {
            throw InvalidArgument("measure_remainder: trajectory has no sample at t=" + std::to_string(times[i]));
        }
    }
    std::vector<std::vector<double>> norms(times.size());
    parallel_for(times.size(), [&](std::size_t i) {
        const Field diff = traj.at(times[i]) - profile(times[i]);
        norms[i].reserve(q_list.size());
        for (double q : q_list) norms[i].push_back(lq_norm(diff, q));
    });
    std::vector<RemainderCurve> out;
    for (std::size_t j = 0; j < q_list.size(); ++j) {
        RemainderCurve c;
        c.q = q_list[j];
        c.dim = traj.grid.dim();
        c.times = times;
        for (std::size_t i = 0; i < times.size(); ++i) {
            c.values.push_back(norms[i][j]);
            c.normalized.push_back(decay_weight(c.dim, c.q, times[i]) * norms[i][j]);
        }
        out.push_back(std::move(c));
    }
    return out;
}

/// Least squares on (log t, log y) of `ys` restricted to [t_lo, t_hi].
inline DecayFit fit_series(const std::vector<double>& ts, const std::vector<double>& ys, FitModel model,
                           double t_lo, double t_hi) {
    if (ts.size() != ys.size()) throw InvalidArgument("fit_decay: times and values differ in length");
    std::vector<double> lt, ly, llt;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < t_lo * (1.0 - 1e-12) || ts[i] > t_hi * (1.0 + 1e-12)) continue;
        if (!(ys[i] > 1e-300) || !std::isfinite(ys[i])) {
            throw DegenerateFit("fit_decay: value " + std::to_string(ys[i]) + " at t=" + std::to_string(ts[i]) +
                                " is not a positive finite number");
        }
        if (model != FitModel::PurePower && !(ts[i] > 1.0)) {
            throw DegenerateFit("fit_decay: log models need t > 1");
        }
        lt.push_back(std::log(ts[i]));
        ly.push_back(std::log(ys[i]));
        llt.push_back(model == FitModel::PurePower ? 0.0 : std::log(std::log(ts[i])));
    }
    const std::size_t m = lt.size();
    if (m < 4) throw DegenerateFit("fit_decay: fewer than 4 points in the window");
    const int cols = model == FitModel::PowerTimesFreeLog ? 3 : 2;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(m), cols);
    Eigen::VectorXd y(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        X(r, 0) = 1.0;
        X(r, 1) = lt[i];
        if (cols == 3) X(r, 2) = llt[i];
        y(r) = model == FitModel::PowerTimesLog ? ly[i] - llt[i] : ly[i];
    }
    const auto qr = X.colPivHouseholderQr();
    if (qr.rank() < cols) throw DegenerateFit("fit_decay: design matrix is rank deficient");
    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd res = y - X * beta;
    const double rss = res.squaredNorm();
    DecayFit fit;
    fit.model = model;
    fit.prefactor = std::exp(beta(0));
    fit.slope = beta(1);
    fit.log_coefficient = model == FitModel::PurePower ? 0.0 : (cols == 3 ? beta(2) : 1.0);
    fit.points = m;
    fit.t_lo = std::exp(lt.front());
    fit.t_hi = std::exp(lt.back());
    fit.residual = std::sqrt(rss / static_cast<double>(m));
    if (static_cast<int>(m) > cols) {
        const Eigen::MatrixXd cov = (X.transpose() * X).inverse() * (rss / static_cast<double>(static_cast<int>(m) - cols));
        fit.slope_se = std::sqrt(std::max(0.0, cov(1, 1)));
        if (cols == 3) fit.log_coefficient_se = std::sqrt(std::max(0.0, cov(2, 2)));
    }
    return fit;
}

/// Fits the normalized curve. The default window drops the two earliest times.
inline DecayFit fit_decay(const RemainderCurve& curve, FitModel model, std::optional<double> t_lo = std::nullopt,
                          std::optional<double> t_hi = std::nullopt) {
    if (curve.times.size() < 3 && !t_lo) throw DegenerateFit("fit_decay: curve too short");
    const double lo = t_lo ? *t_lo : curve.times.at(2);
    const double hi = t_hi ? *t_hi : curve.times.back();
    return fit_series(curve.times, curve.normalized, model, lo, hi);
}

enum class LimitTheorem { T24, T25, BSub, BCritical, BSuper };

inline std::string theorem_name(LimitTheorem t) {
    switch (t) {
        case LimitTheorem::T24: return "T2.4";
        case LimitTheorem::T25: return "T2.5";
        case LimitTheorem::BSub: return "B.sub";
        case LimitTheorem::BCritical: return "B.critical";
        case LimitTheorem::BSuper: return "B.super";
    }
    return "?";
}

/// r(t) = normalized(t) t^{rate} / (log t)^{with_log} / target.
struct LimitReport {
    LimitTheorem theorem = LimitTheorem::BSub;
    double q = 1.0;
    double target = 0.0;
    double rate = 0.0;
    bool with_log = false;
    double delta = 0.15;
    std::vector<double> times;
    std::vector<double> ratios;
    double final_ratio = 0.0;
    bool within_band = false;
    bool settling = false;
    bool pass = false;
    std::string note;
};

/// Checks that the rescaled remainder tends to `target`: pass iff
/// |r(t_max) - 1| <= delta and |r(t_max) - r(t_max/2)| < |r(t_max/2) - r(t_max/4)|.
/// A zero target checks that the rescaled remainder vanishes instead.
inline LimitReport verify_limit_constant(LimitTheorem theorem, const RemainderCurve& curve, double target, double rate,
                                         bool with_log = false, double delta = 0.15, bool throw_if_unsettled = false) {
    LimitReport rep;
    rep.theorem = theorem;
    rep.q = curve.q;
    rep.target = target;
    rep.rate = rate;
    rep.with_log = with_log;
    rep.delta = delta;
    if (curve.times.size() < 3) throw PlateauNotReached("verify_limit_constant: need at least three times");
    std::vector<double> scaled;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const double t = curve.times[i];
        double v = curve.normalized[i] * std::pow(t, rate);
        if (with_log) v /= std::log(t);
        scaled.push_back(v);
        rep.times.push_back(t);
        rep.ratios.push_back(target != 0.0 ? v / target : v);
    }
    const double t_max = curve.times.back();
    auto ratio_at = [&](double t) -> std::optional<double> {
        for (std::size_t i = 0; i < rep.times.size(); ++i) {
            if (std::abs(rep.times[i] - t) <= 1e-9 * t) return rep.ratios[i];
        }
        return std::nullopt;
    };
    const auto r1 = ratio_at(t_max), r2 = ratio_at(t_max / 2.0), r4 = ratio_at(t_max / 4.0);
    if (!r2 || !r4) throw PlateauNotReached("verify_limit_constant: times t_max/2 and t_max/4 must be sampled");
    rep.final_ratio = *r1;
    if (target != 0.0) {
        rep.within_band = std::abs(*r1 - 1.0) <= delta;
        rep.settling = std::abs(*r1 - *r2) < std::abs(*r2 - *r4);
    } else {
        double peak = 0.0;
        for (double v : scaled) peak = std::max(peak, std::abs(v));
        rep.within_band = std::abs(*r1) <= 1e-12 || std::abs(*r1) <= delta * peak;
        rep.settling = std::abs(*r1) <= std::abs(*r2) || std::abs(*r1) <= 1e-12;
    }
    rep.pass = rep.within_band && rep.settling;
    std::ostringstream note;
    note << theorem_name(theorem) << " q=" << curve.q << ": r(t_max)=" << *r1 << " r(t_max/2)=" << *r2
         << " r(t_max/4)=" << *r4;
    if (!rep.settling) note << " (ratio not yet contracting)";
    rep.note = note.str();
    if (throw_if_unsettled && !rep.settling) throw PlateauNotReached(rep.note);
    return rep;
}

/// Tolerances for classifying a free log coefficient.
inline constexpr double kNoLogTolerance = 0.25;
inline constexpr double kSlopeTolerance = 0.05;

struct NonoptimalityReport {
    DecayFit pure;
    DecayFit free_log;
    double odd_moment = 0.0;
    double zero_field_max = 0.0;
    std::vector<double> integral_times;
    std::vector<double> integral_values;
    bool slope_ok = false;
    bool no_log = false;
    bool cancellation_ok = false;
    bool integral_bounded = false;
    bool pass = false;
};

/// At p = 1 + 3/(2n) the normalized remainder of A_{0,1} decays like t^{-1/2}
/// without a logarithm: the would-be log coefficient
/// -(1/2) M_0(R_{0,1}(1) f'(A_0(1))) Σ a_j x_j G_1 vanishes and the coefficient
/// integral I_1(t) stays bounded.
inline NonoptimalityReport verify_nonoptimality_critical(const RemainderCurve& curve, const ProfileBuilder& builder,
                                                         const std::vector<double>& integral_times) {
    const auto& sc = builder.scaling();
    if (std::abs(sc.p() - sc.critical_exponent(1)) > 1e-12) {
        throw RangeViolation("verify_nonoptimality_critical: p must equal 1 + 3/(2n)");
    }
    NonoptimalityReport rep;
    rep.pure = fit_decay(curve, FitModel::PurePower);
    rep.free_log = fit_decay(curve, FitModel::PowerTimesFreeLog);
    rep.odd_moment = builder.odd_moment();
    auto zero_field = builder.convection_mode(1.0);
    zero_field *= -0.5 * rep.odd_moment;
    rep.zero_field_max = zero_field.max_abs();
    rep.integral_times = integral_times;
    for (double t : integral_times) rep.integral_values.push_back(builder.tildeA_integral(1, t));
    rep.integral_bounded = rep.integral_values.size() >= 3;
    for (std::size_t i = 2; i < rep.integral_values.size(); ++i) {
        const double d1 = std::abs(rep.integral_values[i] - rep.integral_values[i - 1]);
        const double d0 = std::abs(rep.integral_values[i - 1] - rep.integral_values[i - 2]);
        if (!(d1 < d0)) rep.integral_bounded = false;
    }
    rep.slope_ok = std::abs(rep.pure.slope + 0.5) <= kSlopeTolerance;
    rep.no_log = std::abs(rep.free_log.log_coefficient) <= kNoLogTolerance;
    rep.cancellation_ok = std::abs(rep.odd_moment) <= 1e-8 && rep.zero_field_max <= 1e-8;
    rep.pass = rep.slope_ok && rep.no_log && rep.cancellation_ok && rep.integral_bounded;
    return rep;
}

/// Rate string of the (p, k) branch, e.g. "-(k+1)σ = -0.2" or "-1/2 (log)".
inline std::string rate_label(const ScalingExponents& sc, int k) {
    std::ostringstream os;
    switch (sc.branch(k)) {
        case ScalingExponents::Branch::Subcritical:
            os << "-(k+1)σ = " << std::setprecision(6) << -(k + 1) * sc.sigma();
            break;
        case ScalingExponents::Branch::Critical: os << "-1/2 (log)"; break;
        case ScalingExponents::Branch::Supercritical: os << "-1/2"; break;
    }
    return os.str();
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// CSV with one row per (q, t).
inline std::string remainder_csv(const std::string& experiment, const std::vector<RemainderCurve>& curves,
                                 double target_rate, const std::vector<double>& target_constants = {}) {
    std::ostringstream os;
    os << "experiment,q,t,raw_norm,normalized_norm,target_rate,target_constant\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& cv = curves[c];
        const double target = c < target_constants.size() ? target_constants[c] : std::nan("");
        for (std::size_t i = 0; i < cv.times.size(); ++i) {
            os << experiment << ',' << format_double(cv.q) << ',' << format_double(cv.times[i]) << ','
               << format_double(cv.values[i]) << ',' << format_double(cv.normalized[i]) << ','
               << format_double(target_rate) << ',' << format_double(target) << '\n';
        }
    }
    return os.str();
}

struct FitRow {
    std::string label;
    double q;
    DecayFit fit;
};

inline std::string fits_csv(const std::string& experiment, const std::vector<FitRow>& rows) {
    std::ostringstream os;
    os << "experiment,label,q,model,slope,slope_se,prefactor,log_coefficient,log_coefficient_se,t_lo,t_hi,points,"
          "residual\n";
    for (const auto& r : rows) {
        const auto& f = r.fit;
        os << experiment << ',' << r.label << ',' << format_double(r.q) << ',' << model_name(f.model) << ','
           << format_double(f.slope) << ',' << format_double(f.slope_se) << ',' << format_double(f.prefactor) << ','
           << format_double(f.log_coefficient) << ',' << format_double(f.log_coefficient_se) << ','
           << format_double(f.t_lo) << ',' << format_double(f.t_hi) << ',' << f.points << ','
           << format_double(f.residual) << '\n';
    }
    return os.str();
}

}  // namespace asymptolab
