#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quasiwave/profiles.hpp"
#include "quasiwave/scenario.hpp"

namespace quasiwave {

using json = nlohmann::json;

enum class SolverChoice { Riemann, Flux, Both };

inline const char* solver_name(SolverChoice s) {
    switch (s) {
    case SolverChoice::Riemann: return "riemann";
    case SolverChoice::Flux: return "flux";
    case SolverChoice::Both: return "both";
    }
    return "?";
}

/// Parsed and validated scenario file with all defaults filled in.
struct ScenarioConfig {
    json model;
    json u0;
    json u1;
    double x_half_width = 0.0;   // resolved value (auto-sized when absent)
    bool x_half_width_given = false;
    std::size_t n = 1024;
    double t_end = 10.0;
    double cfl = 0.45;
    SolverChoice solver = SolverChoice::Riemann;
    double eps_deg_rel = 1e-3;
    double m_blow_rel = 1e3;
    int upwind_order = 1;
    double dt_max = 1.0;
    std::string out_dir = "out";
    std::size_t record_stride = 10;
    std::map<std::string, std::string> labels;
    std::vector<std::string> warnings;

    /// Canonical form with every default materialized; hashing this is the
    /// provenance hash.
    json canonical() const {
        json j;
        j["model"] = model;
        j["u0"] = u0;
        j["u1"] = u1;
        j["grid"] = {{"x_half_width", x_half_width}, {"n", n}};
        j["run"] = {{"t_end", t_end},     {"cfl", cfl},
                    {"solver", solver_name(solver)},
                    {"eps_deg_rel", eps_deg_rel},
                    {"m_blow_rel", m_blow_rel},
                    {"upwind_order", upwind_order},
                    {"dt_max", dt_max}};
        j["output"] = {{"dir", out_dir}, {"record_stride", record_stride}};
        if (!labels.empty()) j["labels"] = labels;
        return j;
    }

    std::uint64_t provenance_hash() const {
        const std::string s = canonical().dump();
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 1099511628211ull;
        }
        return h;
    }
};

namespace detail {

inline double get_number(const json& j, const std::string& path, const char* key,
                         std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ValidationError(path + "." + key, "required number missing");
    }
    if (!j[key].is_number()) throw ValidationError(path + "." + key, "expected a number");
    return j[key].get<double>();
}

inline std::string get_string(const json& j, const std::string& path, const char* key,
                              std::optional<std::string> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        throw ValidationError(path + "." + key, "required string missing");
    }
    if (!j[key].is_string()) throw ValidationError(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ValidationError(path + "." + it.key(), "unknown key");
    }
}

} // namespace detail

inline WaveSpeedModel build_model(const json& spec, const std::string& path = "model") {
    if (!spec.is_object()) throw ValidationError(path, "expected a table");
    const std::string kind = detail::get_string(spec, path, "kind");
    try {
        if (kind == "zabusky") {
            detail::reject_unknown(spec, path, {"kind", "a"});
            return WaveSpeedModel::zabusky(detail::get_number(spec, path, "a"));
        }
        if (kind == "constant") {
            detail::reject_unknown(spec, path, {"kind", "c0"});
            return WaveSpeedModel::constant(detail::get_number(spec, path, "c0", 1.0));
        }
        if (kind == "affine_shift") {
            detail::reject_unknown(spec, path, {"kind", "c0", "slope"});
            return WaveSpeedModel::affine_shift(detail::get_number(spec, path, "c0", 1.0),
                                                detail::get_number(spec, path, "slope", 1.0));
        }
        if (kind == "expression") {
            detail::reject_unknown(spec, path, {"kind", "expr", "theta0", "monotone"});
            const double theta0 = spec.contains("theta0")
                                      ? detail::get_number(spec, path, "theta0")
                                      : -kInf;
            const bool monotone = spec.value("monotone", false);
            return WaveSpeedModel::expression(detail::get_string(spec, path, "expr"), theta0,
                                              monotone);
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(path, e.what());
    }
    throw ValidationError(path + ".kind", "unknown model kind '" + kind + "'");
}

inline Profile build_profile(const json& spec, const std::string& path) {
    if (!spec.is_object()) throw ValidationError(path, "expected a table");
    const std::string kind = detail::get_string(spec, path, "kind", "zero");
    try {
        if (kind == "zero") {
            detail::reject_unknown(spec, path, {"kind", "mass"});
            return Profile::zero();
        }
        if (kind == "bump") {
            detail::reject_unknown(spec, path, {"kind", "amplitude", "radius", "mass"});
            return Profile::bump(detail::get_number(spec, path, "amplitude", 1.0),
                                 detail::get_number(spec, path, "radius", 1.0));
        }
        if (kind == "truncated_gaussian") {
            detail::reject_unknown(spec, path, {"kind", "amplitude", "sigma", "cutoff", "mass"});
            return Profile::truncated_gaussian(
                detail::get_number(spec, path, "amplitude", 1.0),
                detail::get_number(spec, path, "sigma", 1.0),
                detail::get_number(spec, path, "cutoff", 3.0));
        }
        if (kind == "derivative_of") {
            detail::reject_unknown(spec, path, {"kind", "of", "scale", "mass"});
            if (!spec.contains("of")) throw ValidationError(path + ".of", "required table missing");
            return Profile::scaled_derivative_of(build_profile(spec["of"], path + ".of"),
                                                 detail::get_number(spec, path, "scale", 1.0));
        }
        if (kind == "custom") {
            detail::reject_unknown(spec, path, {"kind", "expr", "mass"});
            return Profile::custom(parse_speed_expr(detail::get_string(spec, path, "expr")));
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(path, e.what());
    }
    throw ValidationError(path + ".kind", "unknown profile kind '" + kind + "'");
}

inline ScenarioConfig parse_scenario_config(const json& root) {
    if (!root.is_object()) throw ValidationError("<root>", "expected a table");
    detail::reject_unknown(root, "<root>",
                           {"model", "u0", "u1", "grid", "run", "output", "labels"});
    ScenarioConfig cfg;
    cfg.model = root.contains("model") ? root["model"] : json{{"kind", "constant"}, {"c0", 1.0}};
    cfg.u0 = root.contains("u0") ? root["u0"] : json{{"kind", "zero"}};
    cfg.u1 = root.contains("u1") ? root["u1"] : json{{"kind", "zero"}};

    // Validate model/profiles eagerly so errors carry field paths.
    (void)build_model(cfg.model);
    (void)build_profile(cfg.u0, "u0");
    (void)build_profile(cfg.u1, "u1");

    const json grid = root.value("grid", json::object());
    detail::reject_unknown(grid, "grid", {"x_half_width", "n"});
    if (grid.contains("n")) {
        if (!grid["n"].is_number_integer() || grid["n"].get<long long>() < 16)
            throw ValidationError("grid.n", "expected an integer >= 16");
        cfg.n = grid["n"].get<std::size_t>();
    }
    if (grid.contains("x_half_width")) {
        cfg.x_half_width = detail::get_number(grid, "grid", "x_half_width");
        if (!(cfg.x_half_width > 0.0))
            throw ValidationError("grid.x_half_width", "must be positive");
        cfg.x_half_width_given = true;
    }

    const json run = root.value("run", json::object());
    detail::reject_unknown(run, "run",
                           {"t_end", "cfl", "solver", "eps_deg_rel", "m_blow_rel",
                            "upwind_order", "dt_max"});
    cfg.t_end = detail::get_number(run, "run", "t_end", 10.0);
    if (!(cfg.t_end > 0.0)) throw ValidationError("run.t_end", "must be positive");
    cfg.cfl = detail::get_number(run, "run", "cfl", 0.45);
    if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0)) throw ValidationError("run.cfl", "must be in (0,1)");
    const std::string solver = detail::get_string(run, "run", "solver", "riemann");
    if (solver == "riemann") cfg.solver = SolverChoice::Riemann;
    else if (solver == "flux") cfg.solver = SolverChoice::Flux;
    else if (solver == "both") cfg.solver = SolverChoice::Both;
    else throw ValidationError("run.solver", "expected riemann, flux, or both");
    cfg.eps_deg_rel = detail::get_number(run, "run", "eps_deg_rel", 1e-3);
    if (!(cfg.eps_deg_rel > 0.0)) throw ValidationError("run.eps_deg_rel", "must be positive");
    cfg.m_blow_rel = detail::get_number(run, "run", "m_blow_rel", 1e3);
    if (!(cfg.m_blow_rel > 1.0)) throw ValidationError("run.m_blow_rel", "must exceed 1");
    cfg.upwind_order = static_cast<int>(detail::get_number(run, "run", "upwind_order", 1.0));
    if (cfg.upwind_order != 1 && cfg.upwind_order != 2)
        throw ValidationError("run.upwind_order", "expected 1 or 2");
    cfg.dt_max = detail::get_number(run, "run", "dt_max", 1.0);
    if (!(cfg.dt_max > 0.0)) throw ValidationError("run.dt_max", "must be positive");

    const json output = root.value("output", json::object());
    detail::reject_unknown(output, "output", {"dir", "record_stride"});
    cfg.out_dir = output.value("dir", std::string("out"));
    if (output.contains("record_stride")) {
        if (!output["record_stride"].is_number_integer() ||
            output["record_stride"].get<long long>() < 1)
            throw ValidationError("output.record_stride", "expected an integer >= 1");
        cfg.record_stride = output["record_stride"].get<std::size_t>();
    }

    if (root.contains("labels")) {
        if (!root["labels"].is_object()) throw ValidationError("labels", "expected a table");
        for (auto it = root["labels"].begin(); it != root["labels"].end(); ++it) {
            if (!it.value().is_string())
                throw ValidationError("labels." + it.key(), "expected a string");
            cfg.labels[it.key()] = it.value().get<std::string>();
        }
    }
    return cfg;
}

/// Loads and validates a scenario file.
inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("scenario file '" + path + "': " + e.what());
    }
    return parse_scenario_config(root);
}

/// Builds the concrete scenario: resolves the domain size, samples the
/// profiles, applies optional mass normalization, and packages the grid
/// functions with the model.
inline Scenario build_scenario(ScenarioConfig& cfg) {
    const WaveSpeedModel model = build_model(cfg.model);
    const Profile p0 = build_profile(cfg.u0, "u0");
    const Profile p1 = build_profile(cfg.u1, "u1");

    double support_K = std::max(p0.support_radius(), p1.support_radius());
    if (!std::isfinite(support_K)) support_K = 0.0; // refined after sampling

    // Domain sizing: half width >= K + c_max T_end + 10 dx, with c_max taken
    // at the largest initial value. Auto-expanded with a warning when the
    // configured width falls short.
    double u0_max = 0.0;
    {
        const double probe_w = std::max({support_K, cfg.x_half_width, 1.0});
        const Grid probe = Grid::symmetric(probe_w, 256);
        Field probe_u0 = sample_profile(p0, probe);
        if (cfg.u0.contains("mass")) {
            const double have = trapezoid(probe_u0);
            if (have != 0.0) {
                const double s = detail::get_number(cfg.u0, "u0", "mass") / have;
                for (auto& v : probe_u0.values()) v *= s;
            }
        }
        u0_max = max_value(probe_u0);
    }
    const double c_max = std::max(model.diag(u0_max).c, model.c_at_zero());
    const double base = support_K + c_max * cfg.t_end;
    const double needed =
        (base + 1.0) / (1.0 - std::min(0.5, 20.0 / static_cast<double>(cfg.n)));
    if (!cfg.x_half_width_given) {
        cfg.x_half_width = needed;
        cfg.warnings.push_back("grid.x_half_width auto-sized to " +
                               std::to_string(cfg.x_half_width));
    } else if (cfg.x_half_width < base + 10.0 * (2.0 * cfg.x_half_width / static_cast<double>(cfg.n))) {
        cfg.x_half_width = needed;
        cfg.warnings.push_back("grid.x_half_width below the domain-sizing rule; expanded to " +
                               std::to_string(cfg.x_half_width));
    }

    const Grid grid = Grid::symmetric(cfg.x_half_width, cfg.n);
    Field u0 = sample_profile(p0, grid);
    Field u1 = sample_profile(p1, grid);

    auto normalize = [&](Field& f, const json& spec, const std::string& path) {
        if (!spec.contains("mass")) return;
        const double want = detail::get_number(spec, path, "mass");
        const double have = trapezoid(f);
        if (have == 0.0)
            throw ValidationError(path + ".mass",
                                  "cannot normalize a profile with zero integral");
        const double s = want / have;
        for (auto& v : f.values()) v *= s;
    };
    normalize(u0, cfg.u0, "u0");
    normalize(u1, cfg.u1, "u1");

    if (support_K == 0.0 &&
        (p0.kind() == Profile::Kind::Custom || p1.kind() == Profile::Kind::Custom)) {
        support_K = std::max(compact_support_radius(u0, 1e-12),
                             compact_support_radius(u1, 1e-12));
    }

    return Scenario(std::move(u0), std::move(u1), model, support_K, cfg.labels);
}

} // namespace quasiwave
