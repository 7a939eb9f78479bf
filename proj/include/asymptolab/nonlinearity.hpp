#pragma once

#include <cmath>
#include <string>

#include "error.hpp"
#include "field.hpp"

namespace asymptolab {

/// The flux nonlinearity f with exponent p > 1. All three kinds are
/// homogeneous of order p and satisfy f(0) = 0.
class Nonlinearity {
public:
    enum class Kind {
        AbsPowerSigned,  ///< |ξ|^{p-1} ξ
        AbsPower,        ///< |ξ|^p
        IntegerPower,    ///< ξ^p with integer p
    };

    Nonlinearity(Kind kind, double exponent) : kind_(kind), p_(exponent) {
        if (!(exponent > 1.0)) throw InvalidArgument("Nonlinearity: exponent must exceed 1");
        if (kind == Kind::IntegerPower) {
            if (std::floor(exponent) != exponent) {
                throw InvalidArgument("Nonlinearity: integer_power needs an integer exponent");
            }
            int_p_ = static_cast<int>(exponent);
        }
    }

    static Nonlinearity abs_power_signed(double p) { return {Kind::AbsPowerSigned, p}; }
    static Nonlinearity abs_power(double p) { return {Kind::AbsPower, p}; }
    static Nonlinearity integer_power(int p) { return {Kind::IntegerPower, static_cast<double>(p)}; }

    static Nonlinearity parse(const std::string& kind, double p) {
        if (kind == "abs_power_signed") return abs_power_signed(p);
        if (kind == "abs_power") return abs_power(p);
        if (kind == "integer_power") return {Kind::IntegerPower, p};
        throw InvalidArgument("Nonlinearity: unknown kind '" + kind + "'");
    }

    Kind kind() const noexcept { return kind_; }
    double exponent() const noexcept { return p_; }

    std::string name() const {
        switch (kind_) {
            case Kind::AbsPowerSigned: return "abs_power_signed";
            case Kind::AbsPower: return "abs_power";
            case Kind::IntegerPower: return "integer_power";
        }
        return "?";
    }

    double operator()(double xi) const noexcept {
        switch (kind_) {
            case Kind::AbsPowerSigned: return std::copysign(std::pow(std::abs(xi), p_), xi);
            case Kind::AbsPower: return std::pow(std::abs(xi), p_);
            case Kind::IntegerPower: return ipow(xi, int_p_);
        }
        return 0.0;
    }

    double derivative(double xi) const noexcept {
        switch (kind_) {
            case Kind::AbsPowerSigned: return p_ * std::pow(std::abs(xi), p_ - 1.0);
            case Kind::AbsPower: return std::copysign(p_ * std::pow(std::abs(xi), p_ - 1.0), xi);
            case Kind::IntegerPower: return p_ * ipow(xi, int_p_ - 1);
        }
        return 0.0;
    }

    Field apply(const Field& u) const {
        return u.map([this](double v) { return (*this)(v); });
    }

    Field apply_derivative(const Field& u) const {
        return u.map([this](double v) { return derivative(v); });
    }

private:
    static double ipow(double x, int k) noexcept {
        double r = 1.0;
        for (int i = 0; i < k; ++i) r *= x;
        return r;
    }

    Kind kind_;
    double p_;
    int int_p_ = 0;
};

}  // namespace asymptolab
