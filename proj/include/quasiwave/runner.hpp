#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "quasiwave/config.hpp"
#include "quasiwave/diagnostics.hpp"

namespace quasiwave {

/// Verbosity from QUASIWAVE_LOG: silent by default, "info" or "debug".
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("QUASIWAVE_LOG");
        if (!env) return 0;
        const std::string v(env);
        if (v == "debug") return 2;
        if (v == "info") return 1;
        return 0;
    }();
    return level;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[quasiwave] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "[quasiwave] %s\n", msg.c_str());
}

/// Everything one run produces: hypothesis reports for all three theorems,
/// the classification, the computable bounds, monitors, and the series.
struct RunReport {
    ScenarioConfig config;
    SolverChoice solver_used = SolverChoice::Riemann;
    double eps_deg = 0.0;
    double m_blow = 0.0;
    double initial_scale = 0.0;
    std::uint64_t config_hash = 0;

    HypothesisReport thm1;
    HypothesisReport thm2;
    HypothesisReport thm3;
    std::optional<double> theta1;
    std::optional<double> degeneracy_bound;

    RunClassification classification;
    std::optional<RiccatiFit> riccati;
    std::vector<MonitorViolation> violations;
    std::vector<DiagnosticsRecord> series;

    // u snapshots at record times, kept only when requested (cross-validation)
    std::vector<std::pair<double, Field>> snapshots;
};

namespace detail {

inline constexpr std::size_t kStepBudget = 2'000'000;

struct LoopSink {
    std::vector<DiagnosticsRecord>& series;
    std::vector<std::pair<double, Field>>* snapshots;

    void push(const DiagnosticsRecord& rec, const Field& u) {
        if (!series.empty() && series.back().t == rec.t) series.pop_back();
        series.push_back(rec);
        if (snapshots) {
            if (!snapshots->empty() && snapshots->back().first == rec.t) snapshots->pop_back();
            snapshots->emplace_back(rec.t, u);
        }
    }
};

inline std::string run_riemann_loop(const Scenario& s, const ScenarioConfig& cfg,
                                    const RiemannOptions& opt, LoopSink sink) {
    RiemannState state = initial_riemann_state(s);
    sink.push(record(state, s.model()), state.u);
    std::size_t steps = 0;
    while (state.alive() && state.t < cfg.t_end * (1.0 - 1e-12)) {
        if (++steps > kStepBudget) return "step budget exhausted";
        double dt;
        try {
            dt = cfl_timestep(state, s.model(), opt);
        } catch (const DegeneracyError&) {
            state.stopped_degenerate = true;
            sink.push(record(state, s.model()), state.u);
            return {};
        }
        dt = std::min(dt, cfg.t_end - state.t);
        if (!(dt > 1e-14 * std::max(1.0, cfg.t_end))) return "time step underflow";
        auto [next, stats] = step(state, s.model(), dt, opt);
        state = std::move(next);
        if (steps % cfg.record_stride == 0 || !state.alive() ||
            state.t >= cfg.t_end * (1.0 - 1e-12))
            sink.push(record(state, s.model()), state.u);
    }
    return {};
}

inline std::string run_flux_loop(const Scenario& s, const ScenarioConfig& cfg,
                                 const FluxOptions& opt, LoopSink sink) {
    const double c0 = max_speed(s.model(), s.u0());
    if (c0 == 0.0) return "wave speed vanished at t = 0";
    double dt = std::min(opt.nu * s.grid().dx() / c0, opt.dt_max);
    FluxState state = init_flux(s, dt);
    sink.push(record(state, s.model()), state.u_curr);
    std::size_t steps = 0;
    while (state.alive() && state.t < cfg.t_end * (1.0 - 1e-12)) {
        if (++steps > kStepBudget) return "step budget exhausted";
        double target;
        try {
            target = flux_cfl_timestep(state, s.model(), opt);
        } catch (const DegeneracyError&) {
            state.stopped_degenerate = true;
            sink.push(record(state, s.model()), state.u_curr);
            return {};
        }
        // The leapfrog correction is exact but the step size changes only on
        // a >5% tightening of the CFL bound, to limit how often it engages.
        if (dt > target / 0.95) dt = 0.95 * target;
        const double dt_step = std::min(dt, cfg.t_end - state.t);
        if (!(dt_step > 1e-14 * std::max(1.0, cfg.t_end))) return "time step underflow";
        state = step_flux(state, s.model(), dt_step, opt);
        if (steps % cfg.record_stride == 0 || !state.alive() ||
            state.t >= cfg.t_end * (1.0 - 1e-12))
            sink.push(record(state, s.model()), state.u_curr);
    }
    return {};
}

} // namespace detail

/// Runs one solver on a prepared scenario and assembles the full report.
/// Solver failures never escape: they classify the run INCONCLUSIVE with a
/// reason. cfg supplies the run parameters (horizon, CFL, thresholds,
/// stride); the scenario is used as given.
inline RunReport run_scenario(const Scenario& s, const ScenarioConfig& cfg, SolverChoice which,
                              bool keep_snapshots = false) {
    if (which == SolverChoice::Both) throw DomainError("run_scenario takes a single solver");

    RunReport rep;
    rep.solver_used = which;

    const auto [r1, r2] = riemann_initial(s);
    rep.initial_scale = std::max(max_abs(r1), max_abs(r2));
    rep.eps_deg = cfg.eps_deg_rel * s.model().c_at_zero();
    rep.m_blow = cfg.m_blow_rel * std::max(1.0, rep.initial_scale);

    rep.thm1 = check_hypotheses(s, Theorem::GlobalExistence);
    rep.thm2 = check_hypotheses(s, Theorem::DegeneracyBlowup);
    rep.thm3 = check_hypotheses(s, Theorem::GradientBlowup);
    try {
        rep.theta1 = theta1_floor(s);
    } catch (const Error& e) {
        log_info(std::string("theta1 floor unavailable: ") + e.what());
    }
    rep.degeneracy_bound = degeneracy_time_bound(s);

    std::string failure;
    detail::LoopSink sink{rep.series, keep_snapshots ? &rep.snapshots : nullptr};
    try {
        if (which == SolverChoice::Riemann) {
            RiemannOptions opt;
            opt.nu = cfg.cfl;
            opt.dt_max = cfg.dt_max;
            opt.eps_deg = rep.eps_deg;
            opt.m_blow = rep.m_blow;
            opt.upwind_order = cfg.upwind_order;
            failure = detail::run_riemann_loop(s, cfg, opt, sink);
        } else {
            FluxOptions opt;
            opt.nu = cfg.cfl;
            opt.dt_max = cfg.dt_max;
            opt.eps_deg = rep.eps_deg;
            opt.m_blow = rep.m_blow;
            failure = detail::run_flux_loop(s, cfg, opt, sink);
        }
    } catch (const Error& e) {
        failure = e.what();
    }

    StopThresholds thresholds{rep.eps_deg, rep.m_blow, cfg.t_end};
    rep.classification = detect_stop(rep.series, thresholds);
    if (!failure.empty()) {
        rep.classification.kind = RunClassification::Kind::Inconclusive;
        rep.classification.reason = failure;
    }

    if (rep.classification.kind == RunClassification::Kind::GradientBlowup) {
        try {
            rep.riccati = riccati_estimate(rep.series, 0.3);
        } catch (const FitError& e) {
            log_info(std::string("riccati fit unavailable: ") + e.what());
        }
    }

    MonitorInputs mi;
    const auto* signs1 = rep.thm1.find(Condition::Inicon2);
    const auto* con2 = rep.thm1.find(Condition::Con2);
    const auto* pos = rep.thm1.find(Condition::Inicon1);
    mi.lemma2_hypotheses = signs1 && con2 && pos && signs1->satisfied && con2->satisfied &&
                           pos->satisfied;
    mi.theorem1_all = rep.thm1.all_satisfied();
    mi.theorem2_all = rep.thm2.all_satisfied();
    mi.scale = rep.initial_scale;
    mi.theta1 = rep.theta1;
    mi.support_K = s.support_radius();
    mi.c_max = s.model().diag(max_value(s.u0())).c;
    mi.dx = s.grid().dx();
    rep.violations = check_lemma_monitors(rep.series, mi);

    rep.config = cfg;
    rep.config_hash = cfg.provenance_hash();
    return rep;
}

/// Builds the scenario described by the config and runs one solver on it.
inline RunReport run_one(ScenarioConfig cfg, SolverChoice which, bool keep_snapshots = false) {
    if (which == SolverChoice::Both) throw DomainError("run_one takes a single solver");
    const Scenario s = build_scenario(cfg);
    return run_scenario(s, cfg, which, keep_snapshots);
}

/// Runs the configured solver(s); "both" yields two reports.
inline std::vector<RunReport> run(const ScenarioConfig& cfg) {
    std::vector<RunReport> out;
    if (cfg.solver == SolverChoice::Riemann || cfg.solver == SolverChoice::Both)
        out.push_back(run_one(cfg, SolverChoice::Riemann));
    if (cfg.solver == SolverChoice::Flux || cfg.solver == SolverChoice::Both)
        out.push_back(run_one(cfg, SolverChoice::Flux));
    return out;
}

// ---------------------------------------------------------------------------
// Report output
// ---------------------------------------------------------------------------

inline json hypothesis_json(const HypothesisReport& rep) {
    json conditions = json::array();
    for (const auto& c : rep.conditions) {
        json jc;
        jc["id"] = condition_name(c.id);
        jc["satisfied"] = c.satisfied;
        jc["margin"] = c.margin;
        if (c.location) jc["location"] = *c.location;
        conditions.push_back(jc);
    }
    return json{{"theorem", theorem_name(rep.theorem)},
                {"satisfied", rep.all_satisfied()},
                {"tol_check", rep.tol_check},
                {"conditions", conditions}};
}

inline json report_json(const RunReport& rep, const std::string& series_file) {
    json j;
    j["version"] = "0.1.0";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(rep.config_hash));
    j["provenance"] = {{"config_hash", hash},
                       {"solver", solver_name(rep.solver_used)},
                       {"grid", {{"x_half_width", rep.config.x_half_width},
                                 {"n", rep.config.n}}},
                       {"thresholds", {{"eps_deg", rep.eps_deg}, {"m_blow", rep.m_blow}}},
                       {"config", rep.config.canonical()}};
    j["hypotheses"] = {{"THM1", hypothesis_json(rep.thm1)},
                       {"THM2", hypothesis_json(rep.thm2)},
                       {"THM3", hypothesis_json(rep.thm3)}};
    json cls;
    cls["kind"] = classification_name(rep.classification.kind);
    cls["t_stop"] = rep.classification.t_stop;
    if (rep.classification.kind == RunClassification::Kind::Degenerate)
        cls["x_min_location"] = rep.classification.x_min_location;
    if (rep.classification.kind == RunClassification::Kind::GradientBlowup &&
        std::isfinite(rep.classification.t_estimate))
        cls["t_estimate"] = rep.classification.t_estimate;
    if (!rep.classification.reason.empty()) cls["reason"] = rep.classification.reason;
    j["classification"] = cls;
    json bounds;
    bounds["theta1_floor"] = rep.theta1 ? json(*rep.theta1) : json();
    bounds["degeneracy_time_bound"] =
        rep.degeneracy_bound ? json(*rep.degeneracy_bound) : json();
    j["bounds"] = bounds;
    if (rep.riccati) {
        j["riccati"] = {{"t_a", rep.riccati->t_a},
                        {"t_b", rep.riccati->t_b},
                        {"slope", rep.riccati->slope},
                        {"intercept", rep.riccati->intercept},
                        {"t_estimate", rep.riccati->t_estimate},
                        {"fit_quality", rep.riccati->fit_quality}};
    } else {
        j["riccati"] = json();
    }
    json viol = json::array();
    for (const auto& v : rep.violations)
        viol.push_back({{"monitor", v.monitor}, {"t", v.t}, {"magnitude", v.magnitude}});
    j["monitor_violations"] = viol;
    j["warnings"] = rep.config.warnings;
    j["series_csv"] = series_file;
    return j;
}

inline constexpr const char* kSeriesHeader =
    "t,min_u,min_c,max_abs_R1,max_abs_R2,linf_ut_ux,lp1,lp2,lp4,momentum,support_radius";

inline void write_series_csv(const std::vector<DiagnosticsRecord>& series,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path + "'");
    out << kSeriesHeader << "\n";
    char line[512];
    for (const auto& r : series) {
        std::snprintf(line, sizeof(line),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.t, r.min_u, r.min_c, r.max_abs_r1, r.max_abs_r2, r.linf_ut_plus_ux,
                      r.lp1, r.lp2, r.lp4, r.momentum, r.support_radius);
        out << line;
    }
}

/// Writes report_<solver>.json and series_<solver>.csv under dir.
inline void write_report(const RunReport& rep, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::string tag = solver_name(rep.solver_used);
    const std::string series_file = "series_" + tag + ".csv";
    write_series_csv(rep.series, dir + "/" + series_file);
    std::ofstream out(dir + "/report_" + tag + ".json");
    if (!out) throw Error("cannot write report in '" + dir + "'");
    out << report_json(rep, series_file).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

struct SweepAxis {
    std::string path; // dotted config path, e.g. "u1.mass"
    std::vector<double> values;
};

struct SweepRow {
    std::map<std::string, double> params;
    std::string classification;
    double t_stop = 0.0;
    std::optional<double> theta1;
    std::optional<double> degeneracy_bound;
    std::string reason;
};

/// One run per cell of the cartesian product of the axes. Per-cell failures
/// become INCONCLUSIVE rows; the table is ordered by cell index regardless
/// of worker scheduling.
inline std::vector<SweepRow> sweep(const json& base_config, const std::vector<SweepAxis>& axes,
                                   unsigned jobs = 1) {
    std::size_t cells = 1;
    for (const auto& ax : axes) {
        if (ax.values.empty()) throw DomainError("sweep axis '" + ax.path + "' has no values");
        cells *= ax.values.size();
        if (cells > 10000) throw DomainError("sweep exceeds 10^4 cells");
    }

    auto pointer_for = [](const std::string& dotted) {
        std::string p = "/";
        for (char c : dotted) p += (c == '.') ? '/' : c;
        return json::json_pointer(p);
    };

    std::vector<SweepRow> rows(cells);
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t cell = cursor.fetch_add(1);
            if (cell >= cells) return;
            SweepRow row;
            json patched = base_config;
            std::size_t rest = cell;
            for (const auto& ax : axes) {
                const double v = ax.values[rest % ax.values.size()];
                rest /= ax.values.size();
                patched[pointer_for(ax.path)] = v;
                row.params[ax.path] = v;
            }
            try {
                ScenarioConfig cfg = parse_scenario_config(patched);
                const SolverChoice which =
                    cfg.solver == SolverChoice::Both ? SolverChoice::Riemann : cfg.solver;
                RunReport rep = run_one(cfg, which);
                row.classification = classification_name(rep.classification.kind);
                row.t_stop = rep.classification.t_stop;
                row.theta1 = rep.theta1;
                row.degeneracy_bound = rep.degeneracy_bound;
                row.reason = rep.classification.reason;
            } catch (const std::exception& e) {
                row.classification = "INCONCLUSIVE";
                row.reason = e.what();
            }
            rows[cell] = std::move(row);
        }
    };

    const unsigned worker_count =
        std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cells)));
    if (worker_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (unsigned i = 0; i < worker_count; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Cross-validation of the two discretizations
// ---------------------------------------------------------------------------

struct CrossValidation {
    RunReport riemann;
    RunReport flux;
    double compare_horizon = 0.0; // 0.9 * min(t_stop)
    double max_rel_l2 = 0.0;
    double max_rel_linf = 0.0;
    bool classifications_agree = false;
};

/// Runs both solvers and compares u at matched times (linear interpolation
/// in t between the flux solver's snapshots) up to 0.9 * min(t_stop).
inline CrossValidation cross_validate(const ScenarioConfig& cfg) {
    CrossValidation cv;
    cv.riemann = run_one(cfg, SolverChoice::Riemann, /*keep_snapshots=*/true);
    cv.flux = run_one(cfg, SolverChoice::Flux, /*keep_snapshots=*/true);
    cv.classifications_agree =
        cv.riemann.classification.kind == cv.flux.classification.kind;
    cv.compare_horizon =
        0.9 * std::min(cv.riemann.classification.t_stop, cv.flux.classification.t_stop);

    const auto& fs = cv.flux.snapshots;
    for (const auto& [t, u_r] : cv.riemann.snapshots) {
        if (t > cv.compare_horizon) break;
        // bracket t in the flux snapshots
        std::size_t hi = 0;
        while (hi < fs.size() && fs[hi].first < t) ++hi;
        if (hi >= fs.size()) break;
        Field u_f = fs[hi].second;
        if (hi > 0 && fs[hi].first > t) {
            const auto& [t0, f0] = fs[hi - 1];
            const auto& [t1, f1] = fs[hi];
            const double w = (t - t0) / (t1 - t0);
            for (std::size_t i = 0; i < u_f.size(); ++i)
                u_f[i] = (1.0 - w) * f0[i] + w * f1[i];
        }
        const double norm_l2 = std::sqrt(lp_power_norm(u_r, 2.0));
        const double norm_linf = max_abs(u_r);
        const double d_l2 = l2_distance(u_r, u_f);
        const double d_linf = linf_distance(u_r, u_f);
        cv.max_rel_l2 = std::max(cv.max_rel_l2, norm_l2 > 0.0 ? d_l2 / norm_l2 : d_l2);
        cv.max_rel_linf =
            std::max(cv.max_rel_linf, norm_linf > 0.0 ? d_linf / norm_linf : d_linf);
    }
    return cv;
}

// ---------------------------------------------------------------------------
// Exit codes shared by the CLI and its tests
// ---------------------------------------------------------------------------

enum class ExpectKind { None, Global, Degenerate, Gradient };

inline std::optional<ExpectKind> parse_expect(const std::string& s) {
    if (s == "global") return ExpectKind::Global;
    if (s == "degenerate") return ExpectKind::Degenerate;
    if (s == "gradient") return ExpectKind::Gradient;
    return std::nullopt;
}

/// 0 = completed as expected, 2 = expectation mismatch, 3 = inconclusive.
inline int exit_code_for(const RunClassification& cls, ExpectKind expect) {
    using K = RunClassification::Kind;
    if (cls.kind == K::Inconclusive) return 3;
    if (expect == ExpectKind::None) return 0;
    const bool match = (expect == ExpectKind::Global && cls.kind == K::GlobalWindow) ||
                       (expect == ExpectKind::Degenerate && cls.kind == K::Degenerate) ||
                       (expect == ExpectKind::Gradient && cls.kind == K::GradientBlowup);
    return match ? 0 : 2;
}

} // namespace quasiwave
