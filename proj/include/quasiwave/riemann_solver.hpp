#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "quasiwave/grid.hpp"
#include "quasiwave/scenario.hpp"
#include "quasiwave/wavespeed.hpp"

namespace quasiwave {

/// Solver options for the diagonal first-order system. eps_deg and m_blow
/// are absolute stop thresholds; defaults_for derives them from the model
/// and the initial data scale (1e-3 * c(0) and 1e3 * max(1, scale)).
struct RiemannOptions {
    double nu = 0.45;        // CFL number in (0, 1)
    double dt_max = 1.0;
    double eps_deg = 1e-3;
    double m_blow = 1e3;
    int upwind_order = 1;    // 1 = donor cell, 2 = minmod-limited MUSCL

    static RiemannOptions defaults_for(const WaveSpeedModel& model, double initial_scale,
                                       double nu = 0.45, int upwind_order = 1) {
        RiemannOptions o;
        o.nu = nu;
        o.eps_deg = 1e-3 * model.c_at_zero();
        o.m_blow = 1e3 * std::max(1.0, initial_scale);
        o.upwind_order = upwind_order;
        return o;
    }
};

/// One time level of (u, R1, R2). A state is sealed (not alive) once a stop
/// event fires; sealed fields keep their last computed values.
struct RiemannState {
    double t = 0.0;
    Field u;
    Field r1;
    Field r2;
    bool stopped_degenerate = false;
    bool stopped_blowup = false;

    RiemannState(double time, Field u_, Field r1_, Field r2_)
        : t(time), u(std::move(u_)), r1(std::move(r1_)), r2(std::move(r2_)) {}

    bool alive() const { return !stopped_degenerate && !stopped_blowup; }
    const Grid& grid() const { return u.grid(); }
};

struct StepStats {
    double dt = 0.0;
    double max_abs_r1 = 0.0;
    double max_abs_r2 = 0.0;
    double min_u = 0.0;
    double min_c = 0.0;
    double cfl_realized = 0.0;
};

inline RiemannState initial_riemann_state(const Scenario& s) {
    auto [r1, r2] = riemann_initial(s);
    return RiemannState(0.0, s.u0(), std::move(r1), std::move(r2));
}

/// dt = nu dx / max c(u), capped at dt_max.
inline double cfl_timestep(const RiemannState& state, const WaveSpeedModel& model,
                           const RiemannOptions& opt) {
    if (!(opt.nu > 0.0 && opt.nu < 1.0)) throw DomainError("CFL number must be in (0,1)");
    const double cmax = max_speed(model, state.u);
    if (cmax == 0.0) throw DegeneracyError("wave speed vanished everywhere; no stable step");
    return std::min(opt.nu * state.grid().dx() / cmax, opt.dt_max);
}

/// Pointwise c'(u) / (2 c(u)), the coefficient of the quadratic source.
inline Field source_coefficient(const WaveSpeedModel& model, const Field& u,
                                double eps_deg) {
    Field q(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const SpeedSample s = model.diag(u[i]);
        if (s.degenerate || s.c < eps_deg)
            throw DegeneracyError("wave speed below degeneracy threshold at x = " +
                                  std::to_string(u.grid().x(i)));
        q[i] = s.c_prime / (2.0 * s.c);
    }
    return q;
}

namespace detail {

// Exact solution of dR/dt = q R (R - S) with S frozen, advanced in w = 1/R:
//   w' = q S w - q,   w(t) = w0 e^{z} - q t phi(z),  z = q S t,
// with phi(z) = (e^z - 1)/z. A sign change of w is the Riccati pole; the
// caller seals the state as blown up. R = 0 is a fixed point and is kept
// exactly, which is what makes the sign-preservation property hold in
// floating point.
inline bool riccati_substep(double& r, double s_frozen, double q, double dt) {
    if (r == 0.0 || q == 0.0 || dt == 0.0) return false;
    const double w0 = 1.0 / r;
    const double z = q * s_frozen * dt;
    if (z > 700.0) {
        // e^z overflows; the limit is governed by the sign of w0 - 1/S.
        const double coeff = w0 - 1.0 / s_frozen;
        if (coeff < 0.0) return true;
        r = (coeff == 0.0) ? s_frozen : 0.0;
        return false;
    }
    const double ez = std::exp(z);
    const double phi = (std::abs(z) > 1e-8) ? std::expm1(z) / z : 1.0 + 0.5 * z;
    const double w = w0 * ez - q * dt * phi;
    if (w == 0.0 || std::signbit(w) != std::signbit(w0)) return true;
    r = 1.0 / w;
    return false;
}

inline double minmod(double a, double b) {
    if (a > 0.0 && b > 0.0) return std::min(a, b);
    if (a < 0.0 && b < 0.0) return std::max(a, b);
    return 0.0;
}

// Upwind transport of one invariant over dt with face-averaged speeds.
// rightward: dR/dt + c dR/dx = 0; otherwise dR/dt - c dR/dx = 0.
// Zero-gradient (outflow) values at both ends.
inline void transport(std::vector<double>& r, const std::vector<double>& c, double dt,
                      double dx, bool rightward, int order) {
    const std::size_t n = r.size();
    const double lam = dt / dx;
    std::vector<double> out(n);
    auto at = [&](std::ptrdiff_t i) {
        if (i < 0) return r[0];
        if (i >= static_cast<std::ptrdiff_t>(n)) return r[n - 1];
        return r[static_cast<std::size_t>(i)];
    };
    std::vector<double> sigma;
    if (order >= 2) {
        sigma.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = static_cast<std::ptrdiff_t>(i);
            sigma[i] = minmod(at(k + 1) - at(k), at(k) - at(k - 1));
        }
    }
    auto slope = [&](std::ptrdiff_t i) {
        if (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) return 0.0;
        return sigma[static_cast<std::size_t>(i)];
    };
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::ptrdiff_t>(i);
        if (rightward) {
            const double cf = (i == 0) ? c[0] : 0.5 * (c[i - 1] + c[i]);
            const double v = lam * cf;
            double upd = r[i] - v * (at(k) - at(k - 1));
            if (order >= 2) upd -= 0.5 * v * (1.0 - v) * (slope(k) - slope(k - 1));
            out[i] = upd;
        } else {
            const double cf = (i + 1 == n) ? c[n - 1] : 0.5 * (c[i] + c[i + 1]);
            const double v = lam * cf;
            double upd = r[i] + v * (at(k + 1) - at(k));
            if (order >= 2) upd += 0.5 * v * (1.0 - v) * (slope(k) - slope(k + 1));
            out[i] = upd;
        }
    }
    r.swap(out);
}

} // namespace detail

/// One explicit step of the diagonal system: Strang-split quadratic source
/// (semi-analytic Riccati sub-steps with the cross term frozen) around an
/// upwind transport sweep, then the trapezoid-in-time update of u from the
/// pre/post averages of (R1 + R2)/2.
///
/// Stop events seal the returned state instead of throwing: degeneracy when
/// min c(u) drops below eps_deg, blow-up when an invariant exceeds m_blow,
/// leaves the finite range, or crosses a Riccati pole inside a sub-step.
inline std::pair<RiemannState, StepStats> step(const RiemannState& state,
                                               const WaveSpeedModel& model, double dt,
                                               const RiemannOptions& opt) {
    if (!state.alive()) throw DomainError("step on a sealed state");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");

    const std::size_t n = state.grid().n();
    const double dx = state.grid().dx();

    std::vector<double> c(n), q(n);
    double min_c0 = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        const SpeedSample s = model.diag(state.u[i]);
        c[i] = s.c;
        q[i] = s.degenerate ? 0.0 : s.c_prime / (2.0 * s.c);
        min_c0 = std::min(min_c0, s.c);
    }

    RiemannState next = state;
    if (min_c0 < opt.eps_deg) {
        next.stopped_degenerate = true;
        StepStats stats{0.0, max_abs(next.r1), max_abs(next.r2), min_value(next.u), min_c0, 0.0};
        return {std::move(next), stats};
    }

    std::vector<double> r1 = state.r1.values();
    std::vector<double> r2 = state.r2.values();
    std::vector<double> sum_pre(n);
    for (std::size_t i = 0; i < n; ++i) sum_pre[i] = 0.5 * (r1[i] + r2[i]);

    bool pole = false;

    // Half source step, cross terms frozen at the sub-step entry values.
    for (std::size_t i = 0; i < n; ++i) {
        const double a = r1[i], b = r2[i];
        pole |= detail::riccati_substep(r1[i], b, q[i], 0.5 * dt);
        pole |= detail::riccati_substep(r2[i], a, q[i], 0.5 * dt);
    }

    // Full transport step. R1 rides the minus characteristics (velocity -c),
    // R2 the plus characteristics (velocity +c).
    detail::transport(r1, c, dt, dx, /*rightward=*/false, opt.upwind_order);
    detail::transport(r2, c, dt, dx, /*rightward=*/true, opt.upwind_order);

    // Provisional u for the second source half-step, so the coefficient
    // c'/2c tracks u to second order across the step.
    std::vector<double> q2 = q;
    {
        bool usable = true;
        std::vector<double> qs(n);
        for (std::size_t i = 0; i < n && usable; ++i) {
            const double u_star = state.u[i] + 0.5 * dt * (sum_pre[i] + 0.5 * (r1[i] + r2[i]));
            const SpeedSample s = model.diag(u_star);
            if (s.degenerate || s.c < opt.eps_deg)
                usable = false; // about to stop; keep start-of-step coefficients
            else
                qs[i] = s.c_prime / (2.0 * s.c);
        }
        if (usable) q2.swap(qs);
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double a = r1[i], b = r2[i];
        pole |= detail::riccati_substep(r1[i], b, q2[i], 0.5 * dt);
        pole |= detail::riccati_substep(r2[i], a, q2[i], 0.5 * dt);
    }

    double min_u = kInf, min_c = kInf, max_r1 = 0.0, max_r2 = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double u_new = state.u[i] + 0.5 * dt * (sum_pre[i] + 0.5 * (r1[i] + r2[i]));
        next.u[i] = u_new;
        next.r1[i] = r1[i];
        next.r2[i] = r2[i];
        finite = finite && std::isfinite(u_new) && std::isfinite(r1[i]) && std::isfinite(r2[i]);
        min_u = std::min(min_u, u_new);
        max_r1 = std::max(max_r1, std::abs(r1[i]));
        max_r2 = std::max(max_r2, std::abs(r2[i]));
        min_c = std::min(min_c, model.diag(u_new).c);
    }
    next.t = state.t + dt;

    if (min_c < opt.eps_deg) next.stopped_degenerate = true;
    if (pole || !finite || std::max(max_r1, max_r2) > opt.m_blow) next.stopped_blowup = true;

    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, v);
    StepStats stats{dt, max_r1, max_r2, min_u, min_c, dt * cmax / dx};
    return {std::move(next), stats};
}

/// Inverts the invariant definitions: ut = (R1+R2)/2, ux = (R1-R2)/(2c(u)).
inline std::pair<Field, Field> reconstruct_gradients(const RiemannState& state,
                                                     const WaveSpeedModel& model,
                                                     double eps_deg = 0.0) {
    Field ut(state.grid());
    Field ux(state.grid());
    for (std::size_t i = 0; i < state.grid().n(); ++i) {
        const SpeedSample s = model.diag(state.u[i]);
        if (s.degenerate || s.c < eps_deg)
            throw DegeneracyError("cannot reconstruct gradients on a degenerate state");
        ut[i] = 0.5 * (state.r1[i] + state.r2[i]);
        ux[i] = (state.r1[i] - state.r2[i]) / (2.0 * s.c);
    }
    return {std::move(ut), std::move(ux)};
}

enum class CharacteristicSign { Plus, Minus };

/// A characteristic curve traced through stored states. The minus curve
/// (dx/dt = -c) carries R1, the plus curve (dx/dt = +c) carries R2,
/// matching the transport directions of the diagonal system.
struct CharacteristicProbe {
    CharacteristicSign sign = CharacteristicSign::Plus;
    std::vector<std::pair<double, double>> path; // (t, x)
    std::vector<double> r1_along;
    std::vector<double> r2_along;
    std::vector<double> u_along;
};

namespace detail {

inline double linear_sample(const Field& f, double x) {
    const Grid& g = f.grid();
    if (x < g.x_min() || x > g.x_max()) throw OutOfDomainError("characteristic left the grid");
    const double s = (x - g.x_min()) / g.dx();
    const auto i = static_cast<std::size_t>(std::min(s, static_cast<double>(g.n() - 2)));
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * f[i] + w * f[i + 1];
}

} // namespace detail

/// Integrates dx/dt = +-c(u(t,x)) through the history (RK2 midpoint in
/// time, linear interpolation in x and t) and samples (R1, R2, u) at each
/// stored time level. Throws OutOfDomainError if the path exits the grid.
inline CharacteristicProbe trace_characteristic(const std::vector<RiemannState>& history,
                                                const WaveSpeedModel& model,
                                                CharacteristicSign sign, double x_start) {
    if (history.empty()) throw DomainError("empty history");
    for (std::size_t k = 1; k < history.size(); ++k) {
        if (!(history[k].grid() == history[0].grid()))
            throw DomainError("history grids differ");
        if (!(history[k].t > history[k - 1].t)) throw DomainError("history not time-ordered");
    }
    const double dir = (sign == CharacteristicSign::Plus) ? 1.0 : -1.0;

    // u(t, x) with linear interpolation between the two bracketing states.
    auto u_at = [&](const RiemannState& a, const RiemannState& b, double t, double x) {
        const double span = b.t - a.t;
        const double w = (span > 0.0) ? (t - a.t) / span : 0.0;
        return (1.0 - w) * detail::linear_sample(a.u, x) + w * detail::linear_sample(b.u, x);
    };

    CharacteristicProbe probe;
    probe.sign = sign;
    double x = x_start;
    auto record = [&](const RiemannState& st, double xx) {
        probe.path.emplace_back(st.t, xx);
        probe.r1_along.push_back(detail::linear_sample(st.r1, xx));
        probe.r2_along.push_back(detail::linear_sample(st.r2, xx));
        probe.u_along.push_back(detail::linear_sample(st.u, xx));
    };
    record(history[0], x);
    for (std::size_t k = 1; k < history.size(); ++k) {
        const RiemannState& a = history[k - 1];
        const RiemannState& b = history[k];
        const double h = b.t - a.t;
        const double v1 = dir * model.diag(u_at(a, b, a.t, x)).c;
        const double x_mid = x + 0.5 * h * v1;
        const double v2 = dir * model.diag(u_at(a, b, a.t + 0.5 * h, x_mid)).c;
        x += h * v2;
        record(b, x);
    }
    return probe;
}

} // namespace quasiwave
