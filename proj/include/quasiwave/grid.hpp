#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "quasiwave/errors.hpp"

namespace quasiwave {

/// Uniform grid of cell-centered nodes x_i = x_min + i*dx, i = 0..n-1.
class Grid {
public:
    Grid(double x_min, double dx, std::size_t n) : x_min_(x_min), dx_(dx), n_(n) {
        if (!(dx > 0.0)) throw DomainError("grid spacing must be positive");
        if (n < 16) throw DomainError("grid needs at least 16 nodes");
        if (!std::isfinite(x_min)) throw DomainError("grid origin must be finite");
    }

    /// Symmetric grid of n cells covering [-half_width, half_width].
    static Grid symmetric(double half_width, std::size_t n) {
        if (!(half_width > 0.0)) throw DomainError("half width must be positive");
        const double dx = 2.0 * half_width / static_cast<double>(n);
        return Grid(-half_width + 0.5 * dx, dx, n);
    }

    double x_min() const { return x_min_; }
    double dx() const { return dx_; }
    std::size_t n() const { return n_; }
    double x(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }
    double x_max() const { return x(n_ - 1); }

    bool operator==(const Grid& other) const {
        return x_min_ == other.x_min_ && dx_ == other.dx_ && n_ == other.n_;
    }

private:
    double x_min_;
    double dx_;
    std::size_t n_;
};

/// A grid function: one finite value per node.
class Field {
public:
    explicit Field(const Grid& grid, double fill = 0.0)
        : grid_(grid), values_(grid.n(), fill) {}

    Field(const Grid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.n())
            throw DomainError("field length does not match grid");
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(),
                           [](double v) { return std::isfinite(v); });
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

inline double max_abs(const Field& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_value(const Field& f) {
    double m = f[0];
    for (double v : f.values()) m = std::max(m, v);
    return m;
}

inline double min_value(const Field& f) {
    double m = f[0];
    for (double v : f.values()) m = std::min(m, v);
    return m;
}

/// Composite trapezoid rule over the nodes. Spectrally accurate for smooth
/// fields that vanish near both ends.
inline double trapezoid(const Field& f) {
    const std::size_t n = f.size();
    double sum = 0.5 * (f[0] + f[n - 1]);
    for (std::size_t i = 1; i + 1 < n; ++i) sum += f[i];
    return sum * f.grid().dx();
}

/// Trapezoid integral of |f|^p.
inline double lp_power_norm(const Field& f, double p) {
    const std::size_t n = f.size();
    auto term = [&](std::size_t i) {
        if (p == 1.0) return std::abs(f[i]);
        if (p == 2.0) return f[i] * f[i];
        if (p == 4.0) {
            const double s = f[i] * f[i];
            return s * s;
        }
        return std::pow(std::abs(f[i]), p);
    };
    double sum = 0.5 * (term(0) + term(n - 1));
    for (std::size_t i = 1; i + 1 < n; ++i) sum += term(i);
    return sum * f.grid().dx();
}

inline double l2_distance(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw DomainError("fields on different grids");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum * a.grid().dx());
}

inline double linf_distance(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid())) throw DomainError("fields on different grids");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Spatial derivative: 4th-order central stencil in the interior, 2nd-order
/// central one node in, 2nd-order one-sided at the two boundary nodes.
inline Field spatial_derivative(const Field& f) {
    const std::size_t n = f.size();
    const double dx = f.grid().dx();
    Field d(f.grid());
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    d[1] = (f[2] - f[0]) / (2.0 * dx);
    for (std::size_t i = 2; i + 2 < n; ++i)
        d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * dx);
    d[n - 2] = (f[n - 1] - f[n - 3]) / (2.0 * dx);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    return d;
}

/// 2nd-order central derivative (one-sided at the ends).
inline Field central_derivative(const Field& f) {
    const std::size_t n = f.size();
    const double dx = f.grid().dx();
    Field d(f.grid());
    d[0] = (f[1] - f[0]) / dx;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
    d[n - 1] = (f[n - 1] - f[n - 2]) / dx;
    return d;
}

/// Smallest K with |f| <= tol outside [-K, K]; 0 if that holds everywhere,
/// the grid extent if only the full grid works.
inline double compact_support_radius(const Field& f, double tol) {
    if (tol < 0.0) throw DomainError("tolerance must be non-negative");
    double radius = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (std::abs(f[i]) > tol) radius = std::max(radius, std::abs(f.grid().x(i)));
    return radius;
}

} // namespace quasiwave
