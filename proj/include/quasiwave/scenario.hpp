#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quasiwave/grid.hpp"
#include "quasiwave/profiles.hpp"
#include "quasiwave/wavespeed.hpp"

namespace quasiwave {

/// One Cauchy problem: grid, u0, u1 = initial time derivative, wave-speed
/// model, and the declared support radius K of the data.
class Scenario {
public:
    Scenario(Field u0, Field u1, WaveSpeedModel model, double support_radius_K,
             std::map<std::string, std::string> labels = {})
        : u0_(std::move(u0)), u1_(std::move(u1)), model_(std::move(model)),
          support_radius_K_(support_radius_K), labels_(std::move(labels)) {
        if (!(u0_.grid() == u1_.grid()))
            throw DomainError("u0 and u1 must live on the same grid");
        if (!u0_.all_finite() || !u1_.all_finite())
            throw DomainError("initial data must be finite");
        if (!(min_value(u0_) > model_.theta0()))
            throw DegeneracyError("u0 must stay above theta0");
    }

    const Grid& grid() const { return u0_.grid(); }
    const Field& u0() const { return u0_; }
    const Field& u1() const { return u1_; }
    const WaveSpeedModel& model() const { return model_; }
    double support_radius() const { return support_radius_K_; }
    const std::map<std::string, std::string>& labels() const { return labels_; }

private:
    Field u0_;
    Field u1_;
    WaveSpeedModel model_;
    double support_radius_K_;
    std::map<std::string, std::string> labels_;
};

/// Largest wave speed over a grid function; 0 on fully degenerate values.
inline double max_speed(const WaveSpeedModel& model, const Field& u) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, model.diag(v).c);
    return m;
}

/// Riemann invariants of the initial data:
///   R1 = u1 + c(u0) Dx(u0),  R2 = u1 - c(u0) Dx(u0),
/// with Dx the high-order grid derivative.
inline std::pair<Field, Field> riemann_initial(const Scenario& s) {
    const Field du0 = spatial_derivative(s.u0());
    Field r1(s.grid());
    Field r2(s.grid());
    for (std::size_t i = 0; i < s.grid().n(); ++i) {
        const double c = s.model().eval_speed(s.u0()[i]);
        r1[i] = s.u1()[i] + c * du0[i];
        r2[i] = s.u1()[i] - c * du0[i];
    }
    return {std::move(r1), std::move(r2)};
}

enum class Theorem { GlobalExistence, DegeneracyBlowup, GradientBlowup };

inline const char* theorem_name(Theorem t) {
    switch (t) {
    case Theorem::GlobalExistence: return "THM1";
    case Theorem::DegeneracyBlowup: return "THM2";
    case Theorem::GradientBlowup: return "THM3";
    }
    return "?";
}

/// Hypothesis labels. INICON1..INICON8 are the initial-data conditions in
/// the order the theorems list them; CON2/CON4 are the standing conditions
/// on c (monotonicity, positivity); NONTRIVIAL excludes identically-zero
/// data for the gradient-blow-up case.
enum class Condition {
    Inicon1, // u0 > theta0 pointwise
    Inicon2, // u1 +- c(u0) u0' <= 0 pointwise
    Inicon3, // -integral(u1) < integral_{theta0}^0 c
    Inicon4, // supp u0, u1 inside [-K, K]
    Inicon5, // -integral(u1) > -2 theta0 c(0)
    Inicon6, // c' > 0 (strict) on the sampled range
    Inicon7, // supp u0, u1 inside [-K, K]
    Inicon8, // u1 +- c(u0) u0' >= 0 pointwise
    Con2,    // c' >= 0 on the sampled range
    Con4,    // c > 0 on the sampled range
    Nontrivial,
};

inline const char* condition_name(Condition c) {
    switch (c) {
    case Condition::Inicon1: return "INICON1";
    case Condition::Inicon2: return "INICON2";
    case Condition::Inicon3: return "INICON3";
    case Condition::Inicon4: return "INICON4";
    case Condition::Inicon5: return "INICON5";
    case Condition::Inicon6: return "INICON6";
    case Condition::Inicon7: return "INICON7";
    case Condition::Inicon8: return "INICON8";
    case Condition::Con2: return "CON2";
    case Condition::Con4: return "CON4";
    case Condition::Nontrivial: return "NONTRIVIAL";
    }
    return "?";
}

struct ConditionRecord {
    Condition id;
    bool satisfied = false;
    double margin = 0.0;                  // signed worst-case slack
    std::optional<double> location;       // x of worst violation, if spatial
};

struct HypothesisReport {
    Theorem theorem = Theorem::GlobalExistence;
    double tol_check = 0.0;
    std::vector<ConditionRecord> conditions;

    bool all_satisfied() const {
        return std::all_of(conditions.begin(), conditions.end(),
                           [](const ConditionRecord& r) { return r.satisfied; });
    }

    const ConditionRecord* find(Condition id) const {
        for (const auto& r : conditions)
            if (r.id == id) return &r;
        return nullptr;
    }
};

namespace detail {

inline std::vector<double> speed_probe_points(const Scenario& s) {
    // Probe thetas for the conditions on c. Log-spaced approach toward a
    // finite theta0; plain linear span otherwise.
    const double hi = std::max(1.0, max_value(s.u0()) + 1.0);
    std::vector<double> pts;
    const double theta0 = s.model().theta0();
    if (std::isfinite(theta0)) {
        for (int k = 0; k < 64; ++k) {
            const double g = std::pow(10.0, -6.0 + 6.0 * k / 63.0); // 1e-6 .. 1
            pts.push_back(theta0 + g * (hi - theta0));
        }
    } else {
        const double lo = std::min(min_value(s.u0()) - 5.0, -5.0);
        for (int k = 0; k < 64; ++k)
            pts.push_back(lo + (hi - lo) * k / 63.0);
    }
    return pts;
}

inline ConditionRecord upper_bound_record(Condition id, const Field& r1, const Field& r2,
                                          double tol) {
    // R1, R2 <= 0 pointwise; margin is -max value.
    ConditionRecord rec{id};
    double worst = -kInf;
    double where = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i) {
        if (r1[i] > worst) { worst = r1[i]; where = r1.grid().x(i); }
        if (r2[i] > worst) { worst = r2[i]; where = r2.grid().x(i); }
    }
    rec.margin = -worst;
    rec.location = where;
    rec.satisfied = rec.margin >= -tol;
    return rec;
}

inline ConditionRecord lower_bound_record(Condition id, const Field& r1, const Field& r2,
                                          double tol) {
    // R1, R2 >= 0 pointwise; margin is the min value.
    ConditionRecord rec{id};
    double worst = kInf;
    double where = 0.0;
    for (std::size_t i = 0; i < r1.size(); ++i) {
        if (r1[i] < worst) { worst = r1[i]; where = r1.grid().x(i); }
        if (r2[i] < worst) { worst = r2[i]; where = r2.grid().x(i); }
    }
    rec.margin = worst;
    rec.location = where;
    rec.satisfied = rec.margin >= -tol;
    return rec;
}

inline ConditionRecord support_record(Condition id, const Scenario& s, double tol) {
    const double r0 = compact_support_radius(s.u0(), tol);
    const double r1 = compact_support_radius(s.u1(), tol);
    ConditionRecord rec{id};
    rec.margin = s.support_radius() - std::max(r0, r1);
    rec.location = std::max(r0, r1);
    rec.satisfied = rec.margin >= -tol && std::isfinite(s.support_radius());
    return rec;
}

} // namespace detail

/// Evaluates every hypothesis of the requested theorem on the scenario.
/// Sign conditions are checked pointwise on the grid only; behaviour between
/// nodes is outside what grid data can certify.
inline HypothesisReport check_hypotheses(const Scenario& s, Theorem theorem) {
    const Field du0 = spatial_derivative(s.u0());
    Field cu0du0(s.grid());
    for (std::size_t i = 0; i < s.grid().n(); ++i)
        cu0du0[i] = s.model().eval_speed(s.u0()[i]) * du0[i];
    const double scale = std::max({1.0, max_abs(s.u1()), max_abs(cu0du0)});
    const double tol = 1e-12 * scale;

    HypothesisReport report;
    report.theorem = theorem;
    report.tol_check = tol;

    Field r1(s.grid());
    Field r2(s.grid());
    for (std::size_t i = 0; i < s.grid().n(); ++i) {
        r1[i] = s.u1()[i] + cu0du0[i];
        r2[i] = s.u1()[i] - cu0du0[i];
    }

    // Positivity of u0 above theta0.
    {
        ConditionRecord rec{Condition::Inicon1};
        double worst = kInf;
        double where = 0.0;
        for (std::size_t i = 0; i < s.grid().n(); ++i)
            if (s.u0()[i] < worst) { worst = s.u0()[i]; where = s.grid().x(i); }
        rec.margin = std::isfinite(s.model().theta0()) ? worst - s.model().theta0() : kInf;
        rec.location = where;
        rec.satisfied = rec.margin >= -tol;
        report.conditions.push_back(rec);
    }

    // Conditions on the speed function itself, on a probe set.
    const auto probes = detail::speed_probe_points(s);
    double min_c = kInf, min_cp = kInf;
    for (double th : probes) {
        const SpeedSample sp = s.model().diag(th);
        min_c = std::min(min_c, sp.c);
        min_cp = std::min(min_cp, sp.c_prime);
    }
    {
        ConditionRecord rec{Condition::Con4};
        rec.margin = min_c;
        rec.satisfied = min_c > 0.0;
        report.conditions.push_back(rec);
    }

    const double mass = -trapezoid(s.u1()); // -integral(u1)

    if (theorem == Theorem::GlobalExistence || theorem == Theorem::DegeneracyBlowup) {
        ConditionRecord con2{Condition::Con2};
        con2.margin = min_cp;
        con2.satisfied = con2.margin >= -tol;
        report.conditions.push_back(con2);

        report.conditions.push_back(detail::upper_bound_record(Condition::Inicon2, r1, r2, tol));
    }

    if (theorem == Theorem::GlobalExistence) {
        ConditionRecord rec{Condition::Inicon3};
        const double threshold = speed_primitive(s.model(), s.model().theta0(), 0.0);
        rec.margin = std::isinf(threshold) ? kInf : threshold - mass;
        rec.satisfied = rec.margin >= -tol; // vacuous when theta0 = -inf
        report.conditions.push_back(rec);
    }

    if (theorem == Theorem::DegeneracyBlowup) {
        report.conditions.push_back(detail::support_record(Condition::Inicon4, s, tol));
        ConditionRecord rec{Condition::Inicon5};
        const double theta0 = s.model().theta0();
        rec.margin = std::isfinite(theta0) ? mass - (-2.0 * theta0 * s.model().c_at_zero())
                                           : -kInf; // needs a finite theta0
        rec.satisfied = rec.margin >= -tol;
        report.conditions.push_back(rec);
    }

    if (theorem == Theorem::GradientBlowup) {
        // Strict conditions shift their margin so that `satisfied` keeps the
        // uniform meaning margin >= -tol.
        ConditionRecord mono{Condition::Inicon6};
        mono.margin = min_cp - 2.0 * tol;
        mono.satisfied = mono.margin >= -tol;
        report.conditions.push_back(mono);

        report.conditions.push_back(detail::support_record(Condition::Inicon7, s, tol));
        report.conditions.push_back(detail::lower_bound_record(Condition::Inicon8, r1, r2, tol));

        ConditionRecord nz{Condition::Nontrivial};
        nz.margin = std::max(max_abs(s.u0()), max_abs(s.u1())) - 2.0 * tol;
        nz.satisfied = nz.margin >= -tol;
        report.conditions.push_back(nz);
    }

    return report;
}

/// Upper bound for the degeneracy time of a compact-support scenario whose
/// inward momentum exceeds the threshold: intersection of the momentum line
///   F(t) = F(0) + t F'(0),  F(t) = -integral u(t)
/// with the support bound F(t) <= -2 theta0 (c(0) t + K).
/// Empty when theta0 = -inf or the momentum condition fails (denominator
/// not positive).
inline std::optional<double> degeneracy_time_bound(const Scenario& s) {
    const double theta0 = s.model().theta0();
    if (!std::isfinite(theta0)) return std::nullopt;
    const double f0 = -trapezoid(s.u0());
    const double fp0 = -trapezoid(s.u1());
    const double denominator = fp0 + 2.0 * theta0 * s.model().c_at_zero();
    if (!(denominator > 0.0)) return std::nullopt;
    const double numerator = -2.0 * theta0 * s.support_radius() - f0;
    return numerator / denominator;
}

} // namespace quasiwave
