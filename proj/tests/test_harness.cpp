#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quasiwave/quasiwave.hpp"

using namespace quasiwave;

namespace {

json thm1_base(double mass, std::size_t n = 256, double t_end = 1.0) {
    return json{{"model", {{"kind", "zabusky"}, {"a", 2.0}}},
                {"u0", {{"kind", "zero"}}},
                {"u1", {{"kind", "bump"}, {"amplitude", -1.0}, {"radius", 1.0}, {"mass", -mass}}},
                {"grid", {{"n", n}}},
                {"run", {{"t_end", t_end}}}};
}

} // namespace

TEST_CASE("minimal config fills defaults") {
    ScenarioConfig cfg = parse_scenario_config(json::object());
    CHECK(cfg.n == 1024);
    CHECK(cfg.t_end == Catch::Approx(10.0));
    CHECK(cfg.cfl == Catch::Approx(0.45));
    CHECK(cfg.solver == SolverChoice::Riemann);
    CHECK(cfg.record_stride == 10);
    const Scenario s = build_scenario(cfg);
    CHECK(max_abs(s.u0()) == 0.0);
    CHECK(max_abs(s.u1()) == 0.0);
    CHECK_FALSE(cfg.warnings.empty()); // auto-sized width is echoed
}

TEST_CASE("validation errors name the offending field") {
    try {
        parse_scenario_config(json{{"model", {{"kind", "zabusky"}, {"a", -2.0}}}});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "model.a");
    }
    try {
        parse_scenario_config(json{{"run", {{"cfl", 1.5}}}});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "run.cfl");
    }
    try {
        parse_scenario_config(json{{"grid", {{"n", 4}}}});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "grid.n");
    }
    CHECK_THROWS_AS(parse_scenario_config(json{{"mystery", 1}}), ValidationError);
    CHECK_THROWS_AS(parse_scenario_config(json{{"run", {{"solver", "exact"}}}}),
                    ValidationError);
}

TEST_CASE("domain sizing rule auto-expands an undersized width") {
    json j = thm1_base(0.375);
    j["grid"]["x_half_width"] = 1.2; // far below K + c T
    ScenarioConfig cfg = parse_scenario_config(j);
    const Scenario s = build_scenario(cfg);
    CHECK(cfg.x_half_width > 2.0);
    REQUIRE_FALSE(cfg.warnings.empty());
    CHECK(cfg.warnings.front().find("expanded") != std::string::npos);
    CHECK(s.grid().x_max() > 2.0);
}

TEST_CASE("load_scenario errors") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ParseError);
    const auto dir = std::filesystem::temp_directory_path() / "qw_cfg_test";
    std::filesystem::create_directories(dir);
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(load_scenario(bad.string()), ParseError);
}

TEST_CASE("a small global run classifies and reports cleanly") {
    ScenarioConfig cfg = parse_scenario_config(thm1_base(0.2, 256, 1.0));
    const RunReport rep = run_one(cfg, SolverChoice::Riemann);
    CHECK(rep.classification.kind == RunClassification::Kind::GlobalWindow);
    CHECK(rep.thm1.all_satisfied());
    CHECK_FALSE(rep.thm2.all_satisfied());
    REQUIRE(rep.theta1.has_value());
    CHECK(*rep.theta1 < 0.0);
    REQUIRE_FALSE(rep.series.empty());
    CHECK(rep.series.front().t == 0.0);
    CHECK(rep.series.back().t == Catch::Approx(1.0));
    // time strictly increases across records
    for (std::size_t k = 1; k < rep.series.size(); ++k)
        CHECK(rep.series[k].t > rep.series[k - 1].t);
}

TEST_CASE("identical configs reproduce bit-identical series") {
    ScenarioConfig cfg = parse_scenario_config(thm1_base(0.3, 256, 0.6));
    const RunReport a = run_one(cfg, SolverChoice::Riemann);
    const RunReport b = run_one(cfg, SolverChoice::Riemann);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t k = 0; k < a.series.size(); ++k) {
        CHECK(a.series[k].t == b.series[k].t);
        CHECK(a.series[k].min_u == b.series[k].min_u);
        CHECK(a.series[k].lp2 == b.series[k].lp2);
        CHECK(a.series[k].momentum == b.series[k].momentum);
    }
}

TEST_CASE("provenance hash tracks every config field") {
    ScenarioConfig a = parse_scenario_config(thm1_base(0.3));
    ScenarioConfig b = parse_scenario_config(thm1_base(0.3));
    b.x_half_width = a.x_half_width; // normalize the unresolved width
    a.x_half_width_given = b.x_half_width_given = true;
    CHECK(a.provenance_hash() == b.provenance_hash());
    b.cfl = 0.4;
    CHECK(a.provenance_hash() != b.provenance_hash());
    ScenarioConfig c = parse_scenario_config(thm1_base(0.31));
    c.x_half_width = a.x_half_width;
    c.x_half_width_given = true;
    CHECK(a.provenance_hash() != c.provenance_hash());
}

TEST_CASE("sweep tables are complete and scheduling-independent") {
    const json base = thm1_base(0.2, 128, 0.4);

    SECTION("no axes runs the base config once") {
        const auto rows = sweep(base, {}, 1);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].classification == "GLOBAL_WINDOW");
    }

    SECTION("axis values map onto cells in order, any worker count") {
        const SweepAxis axis{"u1.mass", {-0.1, -0.2, -0.3}};
        const auto serial = sweep(base, {axis}, 1);
        const auto parallel = sweep(base, {axis}, 3);
        REQUIRE(serial.size() == 3);
        REQUIRE(parallel.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(serial[k].params.at("u1.mass") == axis.values[k]);
            CHECK(serial[k].classification == parallel[k].classification);
            CHECK(serial[k].t_stop == parallel[k].t_stop);
        }
    }

    SECTION("a broken cell becomes an INCONCLUSIVE row, sweep continues") {
        const SweepAxis axis{"model.a", {2.0, -1.0}};
        const auto rows = sweep(base, {axis}, 1);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].classification == "GLOBAL_WINDOW");
        CHECK(rows[1].classification == "INCONCLUSIVE");
        CHECK_FALSE(rows[1].reason.empty());
    }

    SECTION("cell budget is enforced") {
        SweepAxis big{"u1.mass", std::vector<double>(101, -0.1)};
        CHECK_THROWS_AS(sweep(base, {big, big}, 1), DomainError);
    }
}

TEST_CASE("cross validation on zero data is exact") {
    json j;
    j["model"] = {{"kind", "constant"}, {"c0", 1.0}};
    j["grid"] = {{"n", 128}};
    j["run"] = {{"t_end", 0.5}};
    ScenarioConfig cfg = parse_scenario_config(j);
    const auto cv = cross_validate(cfg);
    CHECK(cv.classifications_agree);
    CHECK(cv.riemann.classification.kind == RunClassification::Kind::GlobalWindow);
    CHECK(cv.max_rel_l2 == 0.0);
    CHECK(cv.max_rel_linf == 0.0);
}

TEST_CASE("report files carry the pinned CSV schema") {
    ScenarioConfig cfg = parse_scenario_config(thm1_base(0.2, 128, 0.3));
    cfg.record_stride = 5;
    const RunReport rep = run_one(cfg, SolverChoice::Riemann);
    const auto dir = std::filesystem::temp_directory_path() / "qw_report_test";
    std::filesystem::remove_all(dir);
    write_report(rep, dir.string());

    std::ifstream csv(dir / "series_riemann.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "t,min_u,min_c,max_abs_R1,max_abs_R2,linf_ut_ux,lp1,lp2,lp4,momentum,support_radius");
    // 17 significant digits round-trip: the second line's momentum column
    std::string line;
    std::getline(csv, line);
    REQUIRE_FALSE(line.empty());
    // count columns
    std::size_t commas = 0;
    for (char c : line) commas += (c == ',');
    CHECK(commas == 10);

    std::ifstream meta(dir / "report_riemann.json");
    REQUIRE(meta.good());
    const json j = json::parse(meta);
    CHECK(j.contains("provenance"));
    CHECK(j["provenance"].contains("config_hash"));
    CHECK(j["classification"]["kind"] == "GLOBAL_WINDOW");
    CHECK(j["hypotheses"]["THM1"]["satisfied"].get<bool>());
}

TEST_CASE("csv values round-trip at 17 significant digits") {
    std::vector<DiagnosticsRecord> series(1);
    series[0].t = 0.1234567890123456789;
    series[0].momentum = -0.375;
    const auto dir = std::filesystem::temp_directory_path() / "qw_csv_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "series.csv").string();
    write_series_csv(series, path);
    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    const double t_back = std::stod(line.substr(0, line.find(',')));
    CHECK(t_back == series[0].t);
}

TEST_CASE("exit codes follow the expectation contract") {
    RunClassification global{RunClassification::Kind::GlobalWindow, 10.0};
    RunClassification degen{RunClassification::Kind::Degenerate, 0.5};
    RunClassification grad{RunClassification::Kind::GradientBlowup, 0.5};
    RunClassification incon{RunClassification::Kind::Inconclusive, 0.0};

    CHECK(exit_code_for(global, ExpectKind::None) == 0);
    CHECK(exit_code_for(degen, ExpectKind::None) == 0);
    CHECK(exit_code_for(global, ExpectKind::Global) == 0);
    CHECK(exit_code_for(degen, ExpectKind::Degenerate) == 0);
    CHECK(exit_code_for(grad, ExpectKind::Gradient) == 0);
    CHECK(exit_code_for(degen, ExpectKind::Global) == 2);
    CHECK(exit_code_for(global, ExpectKind::Gradient) == 2);
    CHECK(exit_code_for(incon, ExpectKind::None) == 3);
    CHECK(exit_code_for(incon, ExpectKind::Global) == 3);

    CHECK(parse_expect("global") == ExpectKind::Global);
    CHECK(parse_expect("degenerate") == ExpectKind::Degenerate);
    CHECK(parse_expect("gradient") == ExpectKind::Gradient);
    CHECK_FALSE(parse_expect("sideways").has_value());
}
