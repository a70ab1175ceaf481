#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quasiwave/quasiwave.hpp"

namespace qw = quasiwave;

namespace {

void print_classification(const qw::RunReport& rep) {
    const auto& c = rep.classification;
    std::printf("[%s] %s", qw::solver_name(rep.solver_used),
                qw::classification_name(c.kind));
    switch (c.kind) {
    case qw::RunClassification::Kind::GlobalWindow:
        std::printf(" T_end=%g", c.t_stop);
        break;
    case qw::RunClassification::Kind::Degenerate:
        std::printf(" t_stop=%g x_min=%g", c.t_stop, c.x_min_location);
        break;
    case qw::RunClassification::Kind::GradientBlowup:
        std::printf(" t_stop=%g", c.t_stop);
        if (std::isfinite(c.t_estimate)) std::printf(" T_estimate=%g", c.t_estimate);
        break;
    case qw::RunClassification::Kind::Inconclusive:
        std::printf(" (%s)", c.reason.c_str());
        break;
    }
    if (!rep.violations.empty())
        std::printf("  monitor_violations=%zu", rep.violations.size());
    std::printf("\n");
}

void print_hypotheses(const qw::HypothesisReport& rep) {
    std::printf("%s: %s\n", qw::theorem_name(rep.theorem),
                rep.all_satisfied() ? "satisfied" : "NOT satisfied");
    for (const auto& c : rep.conditions) {
        std::printf("  %-11s %-4s margin=%- .6g", qw::condition_name(c.id),
                    c.satisfied ? "ok" : "FAIL", c.margin);
        if (c.location) std::printf("  at x=%g", *c.location);
        std::printf("\n");
    }
}

std::vector<qw::SweepAxis> parse_axes(const std::vector<std::string>& specs) {
    std::vector<qw::SweepAxis> axes;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw qw::ValidationError("--axis", "expected name=v1,v2,...");
        qw::SweepAxis ax;
        ax.path = spec.substr(0, eq);
        std::string rest = spec.substr(eq + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            const auto comma = rest.find(',', pos);
            const std::string tok =
                rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (tok.empty()) throw qw::ValidationError("--axis", "empty value in '" + spec + "'");
            try {
                ax.values.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw qw::ValidationError("--axis", "bad number '" + tok + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        axes.push_back(std::move(ax));
    }
    return axes;
}

void write_sweep_csv(const std::vector<qw::SweepAxis>& axes,
                     const std::vector<qw::SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw qw::Error("cannot write '" + path + "'");
    for (const auto& ax : axes) out << ax.path << ",";
    out << "classification,t_stop,theta1_floor,degeneracy_time_bound,reason\n";
    char buf[64];
    for (const auto& row : rows) {
        for (const auto& ax : axes) {
            std::snprintf(buf, sizeof(buf), "%.17g,", row.params.at(ax.path));
            out << buf;
        }
        out << row.classification << ",";
        std::snprintf(buf, sizeof(buf), "%.17g,", row.t_stop);
        out << buf;
        if (row.theta1) {
            std::snprintf(buf, sizeof(buf), "%.17g", *row.theta1);
            out << buf;
        }
        out << ",";
        if (row.degeneracy_bound) {
            std::snprintf(buf, sizeof(buf), "%.17g", *row.degeneracy_bound);
            out << buf;
        }
        out << "," << row.reason << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quasiwave: a numerical laboratory for u_tt = (c(u)^2 u_x)_x"};
    app.require_subcommand(1);

    std::string config_path, out_dir, solver_flag, expect_flag;
    std::vector<std::string> axis_specs;
    unsigned jobs = 1;

    auto* cmd_run = app.add_subcommand("run", "run a scenario and write reports");
    cmd_run->add_option("config", config_path, "scenario file")->required();
    cmd_run->add_option("--solver", solver_flag, "riemann|flux|both");
    cmd_run->add_option("--expect", expect_flag, "global|degenerate|gradient");
    cmd_run->add_option("--out", out_dir, "output directory");

    auto* cmd_sweep = app.add_subcommand("sweep", "parameter sweep over config axes");
    cmd_sweep->add_option("config", config_path, "scenario file")->required();
    cmd_sweep->add_option("--axis", axis_specs, "name=v1,v2,... (repeatable)")->required();
    cmd_sweep->add_option("--jobs", jobs, "worker threads");
    cmd_sweep->add_option("--out", out_dir, "output directory");

    auto* cmd_check = app.add_subcommand("check", "evaluate theorem hypotheses only");
    cmd_check->add_option("config", config_path, "scenario file")->required();

    auto* cmd_validate = app.add_subcommand("validate", "cross-validate the two solvers");
    cmd_validate->add_option("config", config_path, "scenario file")->required();
    cmd_validate->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            qw::ScenarioConfig cfg = qw::load_scenario(config_path);
            if (!solver_flag.empty()) {
                if (solver_flag == "riemann") cfg.solver = qw::SolverChoice::Riemann;
                else if (solver_flag == "flux") cfg.solver = qw::SolverChoice::Flux;
                else if (solver_flag == "both") cfg.solver = qw::SolverChoice::Both;
                else throw qw::ValidationError("--solver", "expected riemann, flux, or both");
            }
            qw::ExpectKind expect = qw::ExpectKind::None;
            if (!expect_flag.empty()) {
                const auto parsed = qw::parse_expect(expect_flag);
                if (!parsed)
                    throw qw::ValidationError("--expect",
                                              "expected global, degenerate, or gradient");
                expect = *parsed;
            }
            const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
            const auto reports = qw::run(cfg);
            for (const auto& rep : reports) {
                qw::write_report(rep, dir);
                print_classification(rep);
            }
            for (const auto& w : reports.front().config.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            return qw::exit_code_for(reports.front().classification, expect);
        }

        if (cmd_sweep->parsed()) {
            std::ifstream in(config_path);
            if (!in) throw qw::ParseError("cannot open scenario file '" + config_path + "'");
            qw::json base;
            try {
                base = qw::json::parse(in);
            } catch (const qw::json::parse_error& e) {
                throw qw::ParseError(std::string("scenario file: ") + e.what());
            }
            qw::ScenarioConfig cfg = qw::parse_scenario_config(base); // validate base
            const auto axes = parse_axes(axis_specs);
            const auto rows = qw::sweep(base, axes, jobs);
            const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
            std::filesystem::create_directories(dir);
            write_sweep_csv(axes, rows, dir + "/sweep.csv");
            for (const auto& row : rows) {
                for (const auto& [k, v] : row.params) std::printf("%s=%g ", k.c_str(), v);
                std::printf("-> %s t_stop=%g %s\n", row.classification.c_str(), row.t_stop,
                            row.reason.c_str());
            }
            return 0;
        }

        if (cmd_check->parsed()) {
            qw::ScenarioConfig cfg = qw::load_scenario(config_path);
            qw::Scenario s = qw::build_scenario(cfg);
            print_hypotheses(qw::check_hypotheses(s, qw::Theorem::GlobalExistence));
            print_hypotheses(qw::check_hypotheses(s, qw::Theorem::DegeneracyBlowup));
            print_hypotheses(qw::check_hypotheses(s, qw::Theorem::GradientBlowup));
            for (const auto& w : cfg.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
            return 0;
        }

        if (cmd_validate->parsed()) {
            qw::ScenarioConfig cfg = qw::load_scenario(config_path);
            const auto cv = qw::cross_validate(cfg);
            print_classification(cv.riemann);
            print_classification(cv.flux);
            std::printf("compared up to t=%g: max rel L2 = %.3e, max rel Linf = %.3e\n",
                        cv.compare_horizon, cv.max_rel_l2, cv.max_rel_linf);
            if (!out_dir.empty()) {
                qw::write_report(cv.riemann, out_dir);
                qw::write_report(cv.flux, out_dir);
            }
            using K = qw::RunClassification::Kind;
            if (cv.riemann.classification.kind == K::Inconclusive ||
                cv.flux.classification.kind == K::Inconclusive)
                return 3;
            return cv.classifications_agree ? 0 : 2;
        }
    } catch (const qw::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const qw::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
