#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "quasiwave/errors.hpp"
#include "quasiwave/expr.hpp"

namespace quasiwave {

/// One checked evaluation of the wave speed and its derivative.
/// `degenerate` marks a query at or below the degeneracy point; the value is
/// then the continuous extension c = 0 and must only be used for diagnostics
/// and stop checks, never for further dynamics.
struct SpeedSample {
    double c = 0.0;
    double c_prime = 0.0;
    bool degenerate = false;
};

/// The wave speed c(theta) with its derivative and degeneracy point theta0.
///
/// c is positive above theta0, vanishes in the limit theta -> theta0 when
/// theta0 is finite, and is non-decreasing when the model is flagged
/// monotone. Instances are immutable and safe to share between threads.
class WaveSpeedModel {
public:
    enum class Kind { Zabusky, Constant, AffineShift, Expression };

    /// c(theta) = (1 + theta)^(a/2), theta0 = -1. The nonlinear-string family.
    static WaveSpeedModel zabusky(double a) {
        if (!(a > 0.0)) throw DomainError("zabusky exponent must be positive");
        WaveSpeedModel m;
        m.kind_ = Kind::Zabusky;
        m.a_ = a;
        m.theta0_ = -1.0;
        m.c_at_zero_ = 1.0;
        m.monotone_ = true;
        return m;
    }

    /// c(theta) = c0 everywhere; no degeneracy point (theta0 = -inf).
    static WaveSpeedModel constant(double c0) {
        if (!(c0 > 0.0)) throw DomainError("constant speed must be positive");
        WaveSpeedModel m;
        m.kind_ = Kind::Constant;
        m.c0_ = c0;
        m.theta0_ = -kInf;
        m.c_at_zero_ = c0;
        m.monotone_ = true;
        return m;
    }

    /// c(theta) = c0 + slope * theta, theta0 = -c0/slope.
    static WaveSpeedModel affine_shift(double c0 = 1.0, double slope = 1.0) {
        if (!(c0 > 0.0)) throw DomainError("affine intercept must be positive");
        if (!(slope > 0.0)) throw DomainError("affine slope must be positive");
        WaveSpeedModel m;
        m.kind_ = Kind::AffineShift;
        m.c0_ = c0;
        m.slope_ = slope;
        m.theta0_ = -c0 / slope;
        m.c_at_zero_ = c0;
        m.monotone_ = true;
        return m;
    }

    /// User-supplied c(theta) as an expression tree; the derivative is formed
    /// symbolically. theta0 must be declared by the caller (-inf if c never
    /// vanishes).
    static WaveSpeedModel expression(ExprAst::Ptr ast, double theta0, bool monotone = false) {
        if (!ast) throw DomainError("null expression");
        if (!(theta0 < 0.0)) throw DomainError("theta0 must be negative");
        WaveSpeedModel m;
        m.kind_ = Kind::Expression;
        m.ast_ = ast;
        m.ast_deriv_ = derive_speed_expr(ast);
        m.theta0_ = theta0;
        m.monotone_ = monotone;
        m.c_at_zero_ = m.eval_speed(0.0);
        return m;
    }

    static WaveSpeedModel expression(std::string_view text, double theta0, bool monotone = false) {
        return expression(parse_speed_expr(text), theta0, monotone);
    }

    Kind kind() const { return kind_; }
    double theta0() const { return theta0_; }
    double c_at_zero() const { return c_at_zero_; }
    bool monotone() const { return monotone_; }
    double zabusky_exponent() const { return a_; }

    /// c(theta) for theta strictly above theta0. Throws DegeneracyError at or
    /// below theta0, DomainError if a user expression fails to be positive.
    double eval_speed(double theta) const {
        if (theta <= theta0_)
            throw DegeneracyError("wave speed queried at theta <= theta0");
        const double c = raw_speed(theta);
        if (!(c > 0.0))
            throw DomainError("wave speed not positive at theta = " + std::to_string(theta));
        return c;
    }

    /// c'(theta) for theta strictly above theta0.
    double eval_speed_derivative(double theta) const {
        if (theta <= theta0_)
            throw DegeneracyError("wave speed derivative queried at theta <= theta0");
        return raw_derivative(theta);
    }

    /// Unchecked evaluation for diagnostics and solver stop logic. At or
    /// below theta0 returns the continuous extension c = 0 with the
    /// degenerate flag set; the model itself never clamps values above
    /// theta0, however small.
    SpeedSample diag(double theta) const {
        SpeedSample s;
        if (theta <= theta0_) {
            s.degenerate = true;
            return s;
        }
        s.c = raw_speed(theta);
        s.c_prime = raw_derivative(theta);
        if (!std::isfinite(s.c) || s.c <= 0.0) {
            s.c = std::max(s.c, 0.0);
            s.degenerate = true;
        }
        return s;
    }

private:
    double raw_speed(double theta) const {
        switch (kind_) {
        case Kind::Zabusky:
            if (a_ == 2.0) return 1.0 + theta;
            if (a_ == 4.0) return (1.0 + theta) * (1.0 + theta);
            return std::pow(1.0 + theta, 0.5 * a_);
        case Kind::Constant: return c0_;
        case Kind::AffineShift: return c0_ + slope_ * theta;
        case Kind::Expression: return ast_->eval(theta);
        }
        throw DomainError("corrupt model kind");
    }

    double raw_derivative(double theta) const {
        switch (kind_) {
        case Kind::Zabusky:
            if (a_ == 2.0) return 1.0;
            if (a_ == 4.0) return 2.0 * (1.0 + theta);
            return 0.5 * a_ * std::pow(1.0 + theta, 0.5 * a_ - 1.0);
        case Kind::Constant: return 0.0;
        case Kind::AffineShift: return slope_;
        case Kind::Expression: return ast_deriv_->eval(theta);
        }
        throw DomainError("corrupt model kind");
    }

    Kind kind_ = Kind::Constant;
    double theta0_ = -kInf;
    double c_at_zero_ = 1.0;
    bool monotone_ = true;
    double a_ = 0.0;
    double c0_ = 0.0;
    double slope_ = 0.0;
    ExprAst::Ptr ast_;
    ExprAst::Ptr ast_deriv_;
};

/// Convenience alias matching the factory name used in scenario files.
inline WaveSpeedModel builtin_zabusky(double a) { return WaveSpeedModel::zabusky(a); }

/// Integral of c over [lo, hi] by adaptive Gauss-Kronrod quadrature,
/// relative error <= 1e-9. lo may equal theta0: the integrand vanishes at
/// that endpoint so the integral is proper. When theta0 = -inf and lo = -inf
/// the +inf sentinel is returned and the caller treats the associated mass
/// condition as vacuous.
inline double speed_primitive(const WaveSpeedModel& model, double lo, double hi) {
    if (std::isinf(lo) && lo < 0.0) {
        if (std::isinf(model.theta0()))
            return kInf;
        throw DomainError("lower integration limit below theta0");
    }
    if (lo < model.theta0() || lo > hi)
        throw DomainError("speed_primitive requires theta0 <= lo <= hi");
    if (lo == hi) return 0.0;

    const auto f = [&](double theta) { return model.diag(theta).c; };
    double error = 0.0;
    // depth 30 leaves room for the one-sided refinement chain toward a
    // theta0 endpoint, where c has a root-type approach to zero
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 30, 1e-11, &error);
    const double scale = std::max(std::abs(value), 1e-300);
    if (!(error / scale <= 1e-9))
        throw QuadratureError("quadrature tolerance 1e-9 not met within node budget");
    return value;
}

} // namespace quasiwave
