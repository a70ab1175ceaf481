#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "quasiwave/grid.hpp"
#include "quasiwave/scenario.hpp"
#include "quasiwave/wavespeed.hpp"

namespace quasiwave {

struct FluxOptions {
    double nu = 0.45;
    double dt_max = 1.0;
    double eps_deg = 1e-3;
    double m_blow = 1e3;

    static FluxOptions defaults_for(const WaveSpeedModel& model, double initial_scale,
                                    double nu = 0.45) {
        FluxOptions o;
        o.nu = nu;
        o.eps_deg = 1e-3 * model.c_at_zero();
        o.m_blow = 1e3 * std::max(1.0, initial_scale);
        return o;
    }
};

/// Two time levels of u for the leapfrog discretization of the second-order
/// form. dt_prev is the spacing between the stored levels.
struct FluxState {
    double t = 0.0;
    Field u_prev;
    Field u_curr;
    double dt_prev = 0.0;
    bool stopped_degenerate = false;
    bool stopped_blowup = false;

    FluxState(double time, Field prev, Field curr, double dtp)
        : t(time), u_prev(std::move(prev)), u_curr(std::move(curr)), dt_prev(dtp) {}

    bool alive() const { return !stopped_degenerate && !stopped_blowup; }
    const Grid& grid() const { return u_curr.grid(); }
};

namespace detail {

// Discrete flux operator  L(u)_i = [c^2_{i+1/2}(u_{i+1}-u_i) - c^2_{i-1/2}(u_i-u_{i-1})]/dx^2
// with the face speed evaluated at the arithmetic mean of the adjacent
// values. Zero-gradient ghosts make the boundary fluxes vanish, so the sum
// of L telescopes to zero exactly -- that is what conserves the discrete
// momentum.
inline std::vector<double> flux_operator(const WaveSpeedModel& model, const Field& u) {
    const std::size_t n = u.size();
    const double dx = u.grid().dx();
    std::vector<double> flux(n + 1, 0.0); // face i-1/2 at index i
    for (std::size_t i = 1; i < n; ++i) {
        const double c = model.diag(0.5 * (u[i - 1] + u[i])).c;
        flux[i] = c * c * (u[i] - u[i - 1]) / dx;
    }
    std::vector<double> L(n);
    for (std::size_t i = 0; i < n; ++i) L[i] = (flux[i + 1] - flux[i]) / dx;
    return L;
}

} // namespace detail

/// Leapfrog start: u_prev is the 2nd-order Taylor value at t = -dt0.
inline FluxState init_flux(const Scenario& s, double dt0) {
    if (!(dt0 > 0.0)) throw DomainError("dt0 must be positive");
    const double cmax = max_speed(s.model(), s.u0());
    if (cmax > 0.0 && dt0 > s.grid().dx() / cmax)
        throw DomainError("dt0 violates the CFL bound for the initial state");
    const auto L = detail::flux_operator(s.model(), s.u0());
    Field prev(s.grid());
    for (std::size_t i = 0; i < s.grid().n(); ++i)
        prev[i] = s.u0()[i] - dt0 * s.u1()[i] + 0.5 * dt0 * dt0 * L[i];
    return FluxState(0.0, std::move(prev), s.u0(), dt0);
}

inline double flux_cfl_timestep(const FluxState& state, const WaveSpeedModel& model,
                                const FluxOptions& opt) {
    if (!(opt.nu > 0.0 && opt.nu < 1.0)) throw DomainError("CFL number must be in (0,1)");
    const double cmax = max_speed(model, state.u_curr);
    if (cmax == 0.0) throw DegeneracyError("wave speed vanished everywhere; no stable step");
    return std::min(opt.nu * state.grid().dx() / cmax, opt.dt_max);
}

/// ut by backward time difference, ux by 2nd-order central difference.
inline std::pair<Field, Field> gradients_flux(const FluxState& state) {
    Field ut(state.grid());
    for (std::size_t i = 0; i < state.grid().n(); ++i)
        ut[i] = (state.u_curr[i] - state.u_prev[i]) / state.dt_prev;
    return {std::move(ut), central_derivative(state.u_curr)};
}

/// Trapezoid integral of the discrete time derivative. Constant across steps
/// to round-off while the support stays interior; on a sealed state this is
/// the frozen last value, flagged stale.
struct MomentumReading {
    double value = 0.0;
    bool stale = false;
};

inline MomentumReading momentum_total(const FluxState& state) {
    Field ut(state.grid());
    for (std::size_t i = 0; i < state.grid().n(); ++i)
        ut[i] = (state.u_curr[i] - state.u_prev[i]) / state.dt_prev;
    return {trapezoid(ut), !state.alive()};
}

/// One leapfrog step with the standard correction for a step-size change:
///   u_next = u_curr + (dt/dt_prev)(u_curr - u_prev) + dt(dt+dt_prev)/2 L(u_curr).
/// Stop events seal the returned state as in the Riemann solver.
inline FluxState step_flux(const FluxState& state, const WaveSpeedModel& model, double dt,
                           const FluxOptions& opt) {
    if (!state.alive()) throw DomainError("step on a sealed state");
    if (!(dt > 0.0)) throw DomainError("dt must be positive");

    const std::size_t n = state.grid().n();
    double min_c = kInf;
    for (double v : state.u_curr.values()) min_c = std::min(min_c, model.diag(v).c);
    FluxState next = state;
    if (min_c < opt.eps_deg) {
        next.stopped_degenerate = true;
        return next;
    }

    const auto L = detail::flux_operator(model, state.u_curr);
    const double ratio = dt / state.dt_prev;
    const double weight = 0.5 * dt * (dt + state.dt_prev);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double u_next =
            state.u_curr[i] + ratio * (state.u_curr[i] - state.u_prev[i]) + weight * L[i];
        next.u_prev[i] = state.u_curr[i];
        next.u_curr[i] = u_next;
        finite = finite && std::isfinite(u_next);
    }
    next.t = state.t + dt;
    next.dt_prev = dt;

    double min_c_new = kInf;
    for (double v : next.u_curr.values()) min_c_new = std::min(min_c_new, model.diag(v).c);
    if (min_c_new < opt.eps_deg) next.stopped_degenerate = true;

    double blow_functional = 0.0;
    if (finite) {
        const auto [ut, ux] = gradients_flux(next);
        blow_functional = max_abs(ut) + max_abs(ux);
    }
    if (!finite || blow_functional > opt.m_blow) next.stopped_blowup = true;

    return next;
}

} // namespace quasiwave
