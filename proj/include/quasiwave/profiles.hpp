#pragma once

#include <cmath>
#include <memory>
#include <utility>

#include "quasiwave/expr.hpp"
#include "quasiwave/grid.hpp"

namespace quasiwave {

/// Initial-data profile: a function of x with (where meaningful) an exactly
/// known support radius.
class Profile {
public:
    enum class Kind { Zero, Bump, TruncatedGaussian, ScaledDerivativeOf, Custom };

    static Profile zero() { return Profile(Kind::Zero); }

    /// A * exp(-1/(1-(x/K)^2)) for |x| < K, exactly 0 outside. C-infinity
    /// with support exactly [-K, K].
    static Profile bump(double amplitude, double radius) {
        if (!(radius > 0.0)) throw DomainError("bump radius must be positive");
        Profile p(Kind::Bump);
        p.amplitude_ = amplitude;
        p.radius_ = radius;
        return p;
    }

    /// A * exp(-x^2 / (2 sigma^2)) for |x| < cutoff, 0 outside.
    static Profile truncated_gaussian(double amplitude, double sigma, double cutoff) {
        if (!(sigma > 0.0)) throw DomainError("gaussian sigma must be positive");
        if (!(cutoff > 0.0)) throw DomainError("gaussian cutoff must be positive");
        Profile p(Kind::TruncatedGaussian);
        p.amplitude_ = amplitude;
        p.sigma_ = sigma;
        p.radius_ = cutoff;
        return p;
    }

    /// scale * d/dx of another profile.
    static Profile scaled_derivative_of(Profile other, double scale) {
        Profile p(Kind::ScaledDerivativeOf);
        p.child_ = std::make_shared<Profile>(std::move(other));
        p.amplitude_ = scale;
        return p;
    }

    /// Expression in the free variable (named `theta` in the grammar, read
    /// here as x).
    static Profile custom(ExprAst::Ptr ast) {
        if (!ast) throw DomainError("null profile expression");
        Profile p(Kind::Custom);
        p.ast_ = std::move(ast);
        p.ast_deriv_ = derive_speed_expr(p.ast_);
        return p;
    }

    Kind kind() const { return kind_; }

    double value(double x) const {
        switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Bump: {
            const double s = x / radius_;
            if (std::abs(s) >= 1.0) return 0.0;
            return amplitude_ * std::exp(-1.0 / (1.0 - s * s));
        }
        case Kind::TruncatedGaussian:
            if (std::abs(x) >= radius_) return 0.0;
            return amplitude_ * std::exp(-x * x / (2.0 * sigma_ * sigma_));
        case Kind::ScaledDerivativeOf: return amplitude_ * child_->derivative(x);
        case Kind::Custom: return ast_->eval(x);
        }
        throw DomainError("corrupt profile kind");
    }

    double derivative(double x) const {
        switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Bump: {
            const double s = x / radius_;
            if (std::abs(s) >= 1.0) return 0.0;
            const double w = 1.0 - s * s;
            return value(x) * (-2.0 * s / (w * w)) / radius_;
        }
        case Kind::TruncatedGaussian:
            if (std::abs(x) >= radius_) return 0.0;
            return value(x) * (-x / (sigma_ * sigma_));
        case Kind::ScaledDerivativeOf: {
            // Nested derivative profile: 4th-order finite difference of the
            // value, step tied to the child's own length scale.
            const double h = 1e-4 * std::max(1.0, support_radius());
            return (-value(x + 2 * h) + 8 * value(x + h) - 8 * value(x - h) + value(x - 2 * h)) /
                   (12 * h);
        }
        case Kind::Custom: return ast_deriv_->eval(x);
        }
        throw DomainError("corrupt profile kind");
    }

    /// Support radius where exactly known; +inf for custom expressions.
    double support_radius() const {
        switch (kind_) {
        case Kind::Zero: return 0.0;
        case Kind::Bump:
        case Kind::TruncatedGaussian: return radius_;
        case Kind::ScaledDerivativeOf: return child_->support_radius();
        case Kind::Custom: return kInf;
        }
        throw DomainError("corrupt profile kind");
    }

private:
    explicit Profile(Kind k) : kind_(k) {}

    Kind kind_;
    double amplitude_ = 0.0;
    double radius_ = 0.0;
    double sigma_ = 0.0;
    std::shared_ptr<const Profile> child_;
    ExprAst::Ptr ast_;
    ExprAst::Ptr ast_deriv_;
};

/// Pointwise evaluation at the grid nodes.
inline Field sample_profile(const Profile& p, const Grid& g) {
    Field f(g);
    for (std::size_t i = 0; i < g.n(); ++i) f[i] = p.value(g.x(i));
    if (!f.all_finite()) throw DomainError("profile produced non-finite values");
    return f;
}

} // namespace quasiwave
