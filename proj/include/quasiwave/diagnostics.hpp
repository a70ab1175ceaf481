#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "quasiwave/flux_solver.hpp"
#include "quasiwave/riemann_solver.hpp"
#include "quasiwave/scenario.hpp"

namespace quasiwave {

/// Per-step diagnostic snapshot. The first group matches the CSV columns;
/// the signed extrema and location fields feed the lemma monitors and the
/// classifier only.
struct DiagnosticsRecord {
    double t = 0.0;
    double min_u = 0.0;
    double min_c = 0.0;
    double max_abs_r1 = 0.0;
    double max_abs_r2 = 0.0;
    double linf_ut_plus_ux = 0.0;
    double lp1 = 0.0; // ||R1||_p^p + ||R2||_p^p, trapezoid quadrature
    double lp2 = 0.0;
    double lp4 = 0.0;
    double momentum = 0.0; // integral of dt u
    double support_radius = 0.0;

    double x_at_min_u = 0.0;
    double max_r1 = 0.0, min_r1 = 0.0;
    double max_r2 = 0.0, min_r2 = 0.0;
    bool stopped_degenerate = false;
    bool stopped_blowup = false;
};

namespace detail {

inline constexpr double kSupportTol = 1e-12;

inline DiagnosticsRecord record_common(double t, const Field& u, const Field& r1,
                                       const Field& r2, const WaveSpeedModel& model,
                                       double momentum) {
    DiagnosticsRecord rec;
    rec.t = t;
    rec.momentum = momentum;

    rec.min_u = kInf;
    rec.min_c = kInf;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = u.grid().x(i);
        // tie-break the arg-min toward the smallest |x| so flat states
        // report a central location
        if (u[i] < rec.min_u ||
            (u[i] == rec.min_u && std::abs(x) < std::abs(rec.x_at_min_u))) {
            rec.min_u = u[i];
            rec.x_at_min_u = x;
        }
        rec.min_c = std::min(rec.min_c, model.diag(u[i]).c);
    }

    rec.max_r1 = -kInf; rec.min_r1 = kInf;
    rec.max_r2 = -kInf; rec.min_r2 = kInf;
    double linf = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i) {
        rec.max_r1 = std::max(rec.max_r1, r1[i]);
        rec.min_r1 = std::min(rec.min_r1, r1[i]);
        rec.max_r2 = std::max(rec.max_r2, r2[i]);
        rec.min_r2 = std::min(rec.min_r2, r2[i]);
        const double c = model.diag(u[i]).c;
        const double ut = 0.5 * (r1[i] + r2[i]);
        const double ux = (c > 0.0) ? (r1[i] - r2[i]) / (2.0 * c) : 0.0;
        linf = std::max(linf, std::abs(ut) + std::abs(ux));
    }
    rec.max_abs_r1 = std::max(std::abs(rec.max_r1), std::abs(rec.min_r1));
    rec.max_abs_r2 = std::max(std::abs(rec.max_r2), std::abs(rec.min_r2));
    rec.linf_ut_plus_ux = linf;

    rec.lp1 = lp_power_norm(r1, 1.0) + lp_power_norm(r2, 1.0);
    rec.lp2 = lp_power_norm(r1, 2.0) + lp_power_norm(r2, 2.0);
    rec.lp4 = lp_power_norm(r1, 4.0) + lp_power_norm(r2, 4.0);
    rec.support_radius = compact_support_radius(u, kSupportTol);
    return rec;
}

} // namespace detail

inline DiagnosticsRecord record(const RiemannState& state, const WaveSpeedModel& model) {
    Field ut(state.grid());
    for (std::size_t i = 0; i < ut.size(); ++i)
        ut[i] = 0.5 * (state.r1[i] + state.r2[i]);
    DiagnosticsRecord rec =
        detail::record_common(state.t, state.u, state.r1, state.r2, model, trapezoid(ut));
    rec.stopped_degenerate = state.stopped_degenerate;
    rec.stopped_blowup = state.stopped_blowup;
    return rec;
}

inline DiagnosticsRecord record(const FluxState& state, const WaveSpeedModel& model) {
    const auto [ut, ux] = gradients_flux(state);
    Field r1(state.grid());
    Field r2(state.grid());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        const double c = model.diag(state.u_curr[i]).c;
        r1[i] = ut[i] + c * ux[i];
        r2[i] = ut[i] - c * ux[i];
    }
    DiagnosticsRecord rec = detail::record_common(state.t, state.u_curr, r1, r2, model,
                                                  momentum_total(state).value);
    rec.stopped_degenerate = state.stopped_degenerate;
    rec.stopped_blowup = state.stopped_blowup;
    return rec;
}

/// Solves integral_{theta1}^{0} c = -integral(u1) for the non-degeneracy
/// floor theta1 in (theta0, 0]. Empty when the mass reaches or exceeds the
/// full primitive integral_{theta0}^{0} c (the global-existence mass
/// condition fails, so no floor is implied).
inline std::optional<double> theta1_floor(const Scenario& s) {
    const double mass = -trapezoid(s.u1());
    if (mass <= 0.0) return 0.0;
    const double total = speed_primitive(s.model(), s.model().theta0(), 0.0);
    if (!(mass < total)) return std::nullopt;

    double hi = 0.0; // primitive(hi) < mass side
    double lo;       // primitive(lo) > mass side
    if (std::isfinite(s.model().theta0())) {
        lo = s.model().theta0();
    } else {
        lo = -1.0;
        while (speed_primitive(s.model(), lo, 0.0) <= mass) {
            lo *= 2.0;
            if (lo < -1e12) throw QuadratureError("theta1 bracket expansion failed");
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = speed_primitive(s.model(), mid, 0.0) - mass;
        if (std::abs(g) <= 1e-12 * std::max(1.0, mass)) return mid;
        if (g > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(lo))) break;
    }
    return 0.5 * (lo + hi);
}

/// How a run ended.
struct RunClassification {
    enum class Kind { GlobalWindow, Degenerate, GradientBlowup, Inconclusive };
    Kind kind = Kind::Inconclusive;
    double t_stop = 0.0;        // horizon for GlobalWindow, stop time otherwise
    double x_min_location = 0.0; // Degenerate: where u bottomed out
    double t_estimate = std::numeric_limits<double>::quiet_NaN(); // GradientBlowup
    std::string reason;          // Inconclusive
};

inline const char* classification_name(RunClassification::Kind k) {
    switch (k) {
    case RunClassification::Kind::GlobalWindow: return "GLOBAL_WINDOW";
    case RunClassification::Kind::Degenerate: return "DEGENERATE";
    case RunClassification::Kind::GradientBlowup: return "GRADIENT_BLOWUP";
    case RunClassification::Kind::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

/// Affine fit of t -> 1/max|R| over the tail of a run; the root of the
/// fitted line estimates the blow-up time.
struct RiccatiFit {
    double t_a = 0.0;
    double t_b = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double t_estimate = 0.0;
    double fit_quality = 0.0; // coefficient of determination
};

inline RiccatiFit riccati_estimate(const std::vector<DiagnosticsRecord>& history,
                                   double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw DomainError("window fraction must be in (0,1]");
    std::vector<std::pair<double, double>> pts; // (t, max R)
    for (const auto& rec : history) {
        const double m = std::max(rec.max_abs_r1, rec.max_abs_r2);
        if (std::isfinite(m) && m > 0.0) pts.emplace_back(rec.t, m);
    }
    const auto total = pts.size();
    const auto want = static_cast<std::size_t>(std::ceil(window_fraction * static_cast<double>(total)));
    if (want < 8 || total < 8) throw FitError("need at least 8 records for a pole fit");
    pts.erase(pts.begin(), pts.end() - static_cast<std::ptrdiff_t>(std::max<std::size_t>(want, 8)));
    for (std::size_t k = 1; k < pts.size(); ++k)
        if (!(pts[k].second > pts[k - 1].second))
            throw FitError("max invariant not monotonically growing in the fit window");

    // Least squares on y = 1/m.
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (auto [t, m] : pts) {
        const double y = 1.0 / m;
        st += t; sy += y; stt += t * t; sty += t * y;
    }
    const auto n = static_cast<double>(pts.size());
    const double denom = n * stt - st * st;
    if (denom == 0.0) throw FitError("degenerate time values in fit window");
    RiccatiFit fit;
    fit.t_a = pts.front().first;
    fit.t_b = pts.back().first;
    fit.slope = (n * sty - st * sy) / denom;
    fit.intercept = (sy - fit.slope * st) / n;
    if (fit.slope == 0.0) throw FitError("flat fit; no pole");
    fit.t_estimate = -fit.intercept / fit.slope;

    double ss_res = 0, ss_tot = 0;
    const double y_mean = sy / n;
    for (auto [t, m] : pts) {
        const double y = 1.0 / m;
        const double y_hat = fit.intercept + fit.slope * t;
        ss_res += (y - y_hat) * (y - y_hat);
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    fit.fit_quality = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

/// Stop thresholds the classifier compares against; must match the solver
/// options of the run that produced the history.
struct StopThresholds {
    double eps_deg = 1e-3;
    double m_blow = 1e3;
    double horizon = 0.0; // T_end of the run
};

/// Classifies a finished run from its records. Degeneracy and blow-up
/// crossings in the same record are never silently ranked: that case is
/// INCONCLUSIVE with both flags named in the reason.
inline RunClassification detect_stop(const std::vector<DiagnosticsRecord>& history,
                                     const StopThresholds& thresholds) {
    RunClassification out;
    if (history.empty()) {
        out.reason = "no records";
        return out;
    }

    auto deg_trip = [&](const DiagnosticsRecord& r) {
        return r.min_c < thresholds.eps_deg || r.stopped_degenerate;
    };
    auto blow_trip = [&](const DiagnosticsRecord& r) {
        return r.linf_ut_plus_ux > thresholds.m_blow ||
               std::max(r.max_abs_r1, r.max_abs_r2) > thresholds.m_blow ||
               !std::isfinite(r.linf_ut_plus_ux) || r.stopped_blowup;
    };

    std::ptrdiff_t deg_at = -1, blow_at = -1;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (deg_at < 0 && deg_trip(history[i])) deg_at = static_cast<std::ptrdiff_t>(i);
        if (blow_at < 0 && blow_trip(history[i])) blow_at = static_cast<std::ptrdiff_t>(i);
    }

    if (deg_at >= 0 && blow_at >= 0 && deg_at == blow_at) {
        out.kind = RunClassification::Kind::Inconclusive;
        out.t_stop = history[static_cast<std::size_t>(deg_at)].t;
        out.reason = "degeneracy and gradient blow-up tripped in the same record";
        return out;
    }
    if (deg_at >= 0 && (blow_at < 0 || deg_at < blow_at)) {
        const auto& rec = history[static_cast<std::size_t>(deg_at)];
        out.kind = RunClassification::Kind::Degenerate;
        out.t_stop = rec.t;
        out.x_min_location = rec.x_at_min_u;
        return out;
    }
    if (blow_at >= 0) {
        const auto& rec = history[static_cast<std::size_t>(blow_at)];
        if (rec.min_c >= 2.0 * thresholds.eps_deg) {
            out.kind = RunClassification::Kind::GradientBlowup;
            out.t_stop = rec.t;
            try {
                out.t_estimate = riccati_estimate(history, 0.3).t_estimate;
            } catch (const FitError&) {
                // estimate stays NaN; the classification itself stands
            }
            return out;
        }
        out.kind = RunClassification::Kind::Inconclusive;
        out.t_stop = rec.t;
        out.reason = "gradient blow-up with the wave speed already marginal";
        return out;
    }

    const double t_last = history.back().t;
    if (t_last + 1e-9 * std::max(1.0, thresholds.horizon) >= thresholds.horizon) {
        out.kind = RunClassification::Kind::GlobalWindow;
        out.t_stop = thresholds.horizon;
        return out;
    }
    out.t_stop = t_last;
    out.reason = "run ended before the horizon without a stop event";
    return out;
}

/// Applicability flags and scales for the runtime monitors, filled by the
/// runner from the hypothesis reports and the scenario.
struct MonitorInputs {
    bool lemma2_hypotheses = false; // monotone c, one-signed invariants
    bool theorem1_all = false;      // Lemma 4 floor applies
    bool theorem2_all = false;      // support cone applies
    double scale = 1.0;             // initial sup norm of the invariants
    std::optional<double> theta1;   // Lemma 4 floor
    double support_K = 0.0;
    double c_max = 0.0;             // c(max u0)
    double dx = 0.0;
};

struct MonitorViolation {
    std::string monitor;
    double t = 0.0;
    double magnitude = 0.0;
};

/// Replays the paper's lemmas over the records: sign preservation, Lp decay,
/// the L-infinity factor-2 bound, the theta1 floor and the support cone.
/// Sealed tail records (blow-up values) are skipped where a lemma only
/// constrains the solution while it exists.
inline std::vector<MonitorViolation> check_lemma_monitors(
    const std::vector<DiagnosticsRecord>& history, const MonitorInputs& in) {
    std::vector<MonitorViolation> out;
    if (history.empty()) return out;
    const auto& first = history.front();

    auto alive_records = [&](auto&& fn) {
        for (const auto& rec : history) {
            if (rec.stopped_blowup) break;
            fn(rec);
        }
    };

    // Sign preservation, per invariant, keyed off the initial sign.
    {
        const double tol = 1e-8 * std::max(1.0, in.scale);
        const bool r1_nonpos = first.max_r1 <= tol;
        const bool r1_nonneg = first.min_r1 >= -tol;
        const bool r2_nonpos = first.max_r2 <= tol;
        const bool r2_nonneg = first.min_r2 >= -tol;
        alive_records([&](const DiagnosticsRecord& rec) {
            double excess = 0.0;
            if (r1_nonpos) excess = std::max(excess, rec.max_r1);
            if (r1_nonneg) excess = std::max(excess, -rec.min_r1);
            if (r2_nonpos) excess = std::max(excess, rec.max_r2);
            if (r2_nonneg) excess = std::max(excess, -rec.min_r2);
            if (excess > tol)
                out.push_back({"SIGN_PRESERVATION", rec.t, excess});
        });
    }

    if (in.lemma2_hypotheses) {
        // Lp decay: the sum may not rise faster than the tolerance rate.
        struct Track { double DiagnosticsRecord::* field; const char* name; double p; };
        const Track tracks[] = {{&DiagnosticsRecord::lp1, "LP_MONOTONE_P1", 1.0},
                                {&DiagnosticsRecord::lp2, "LP_MONOTONE_P2", 2.0},
                                {&DiagnosticsRecord::lp4, "LP_MONOTONE_P4", 4.0}};
        for (const auto& tr : tracks) {
            const double rate = 1e-6 * std::pow(std::max(1.0, in.scale), tr.p);
            double floor = kInf; // running min of lp - rate * t
            alive_records([&](const DiagnosticsRecord& rec) {
                const double g = rec.*tr.field - rate * rec.t;
                if (g > floor) out.push_back({tr.name, rec.t, g - floor});
                floor = std::min(floor, g);
            });
        }

        const double initial_sum = first.max_abs_r1 + first.max_abs_r2;
        const double cap = 2.0 * initial_sum * (1.0 + 1e-3);
        alive_records([&](const DiagnosticsRecord& rec) {
            const double sum = rec.max_abs_r1 + rec.max_abs_r2;
            if (sum > cap) out.push_back({"LINF_FACTOR2", rec.t, sum - cap});
        });
    }

    if (in.theorem1_all && in.theta1 && std::isfinite(*in.theta1)) {
        const double floor = *in.theta1 - 1e-3 * std::max(1.0, std::abs(*in.theta1));
        alive_records([&](const DiagnosticsRecord& rec) {
            if (rec.min_u < floor)
                out.push_back({"THETA1_FLOOR", rec.t, floor - rec.min_u});
        });
    }

    if (in.theorem2_all) {
        alive_records([&](const DiagnosticsRecord& rec) {
            const double allowed = in.support_K + in.c_max * rec.t + 2.0 * in.dx;
            if (rec.support_radius > allowed)
                out.push_back({"SUPPORT_CONE", rec.t, rec.support_radius - allowed});
        });
    }

    return out;
}

} // namespace quasiwave
