#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "quasiwave/riemann_solver.hpp"
#include "oracles.hpp"

using namespace quasiwave;

namespace {

RiemannState uniform_state(const Grid& g, double u, double r1, double r2) {
    return RiemannState(0.0, Field(g, u), Field(g, r1), Field(g, r2));
}

// Advance the solver with a fixed dt until t_end.
RiemannState advance(RiemannState state, const WaveSpeedModel& model, double dt, double t_end,
                     const RiemannOptions& opt) {
    while (state.alive() && state.t < t_end * (1.0 - 1e-12)) {
        const double h = std::min(dt, t_end - state.t);
        auto [next, stats] = step(state, model, h, opt);
        state = std::move(next);
    }
    return state;
}

} // namespace

TEST_CASE("cfl timestep arithmetic") {
    RiemannOptions opt;
    opt.dt_max = 100.0;

    const Grid g1(0.0, 0.01, 64);
    opt.nu = 0.45;
    // max c = 2 via an affine model at u = 0.25
    auto st = uniform_state(g1, 0.25, 0.0, 0.0);
    CHECK(cfl_timestep(st, WaveSpeedModel::affine_shift(1.0, 4.0), opt) ==
          Catch::Approx(0.00225));

    const Grid g2(0.0, 0.1, 64);
    opt.nu = 0.5;
    CHECK(cfl_timestep(uniform_state(g2, 0.0, 0.0, 0.0), WaveSpeedModel::constant(1.0), opt) ==
          Catch::Approx(0.05));

    // dt is set by the largest speed, not the smallest
    const Grid g3 = Grid::symmetric(2.0, 64);
    Field u(g3);
    for (std::size_t i = 0; i < g3.n(); ++i) u[i] = (i < g3.n() / 2) ? -0.999 : 0.0;
    RiemannState mixed(0.0, u, Field(g3), Field(g3));
    opt.nu = 0.45;
    CHECK(cfl_timestep(mixed, WaveSpeedModel::zabusky(2.0), opt) ==
          Catch::Approx(0.45 * g3.dx() / 1.0));

    CHECK(cfl_timestep(uniform_state(g2, 0.0, 0.0, 0.0), WaveSpeedModel::constant(1000.0),
                        RiemannOptions{.nu = 0.5, .dt_max = 1e-6}) == Catch::Approx(1e-6));
}

TEST_CASE("source coefficient closed forms") {
    const Grid g = Grid::symmetric(1.0, 32);
    const Field zeros(g, 0.0);

    const Field q0 = source_coefficient(WaveSpeedModel::constant(3.0), zeros, 1e-3);
    for (double v : q0.values()) CHECK(v == 0.0);

    // Zabusky a=2: c'=1, c=1 at u=0 -> 1/2; c=1/2 at u=-1/2 -> 1
    const auto m = WaveSpeedModel::zabusky(2.0);
    const Field q_flat = source_coefficient(m, zeros, 1e-3);
    for (double v : q_flat.values()) CHECK(v == Catch::Approx(0.5));
    const Field q_low = source_coefficient(m, Field(g, -0.5), 1e-3);
    for (double v : q_low.values()) CHECK(v == Catch::Approx(1.0));

    CHECK_THROWS_AS(source_coefficient(m, Field(g, -0.9999), 1e-3), DegeneracyError);
}

TEST_CASE("zero invariants are a fixed point") {
    const Grid g = Grid::symmetric(2.0, 64);
    const auto m = WaveSpeedModel::zabusky(2.0);
    RiemannState st(0.0, Field(g, 0.3), Field{g}, Field{g});
    const auto opt = RiemannOptions::defaults_for(m, 1.0);
    const auto [next, stats] = step(st, m, 0.01, opt);
    CHECK(next.t == Catch::Approx(0.01));
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(next.u[i] == 0.3);
        CHECK(next.r1[i] == 0.0);
        CHECK(next.r2[i] == 0.0);
    }
}

TEST_CASE("constant-speed transport advects R1 leftward") {
    const Grid g = Grid::symmetric(8.0, 512);
    const auto m = WaveSpeedModel::constant(1.0);
    const Profile bump = Profile::bump(1.0, 1.0);
    RiemannState st(0.0, Field{g}, sample_profile(bump, g), Field{g});
    auto opt = RiemannOptions::defaults_for(m, 1.0);
    const double dt = 0.45 * g.dx();
    const double T = 2.0;
    st = advance(std::move(st), m, dt, T, opt);
    REQUIRE(st.alive());

    // exact: the bump shifted left by T, R2 identically zero
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i)
        l1 += std::abs(st.r1[i] - bump.value(g.x(i) + T)) * g.dx();
    CHECK(l1 < 0.25); // first-order upwind at this resolution
    CHECK(max_abs(st.r2) <= 1e-12);

    // halving dx roughly halves the transport error
    const Grid g2 = Grid::symmetric(8.0, 1024);
    RiemannState st2(0.0, Field(g2), sample_profile(bump, g2), Field(g2));
    st2 = advance(std::move(st2), m, 0.45 * g2.dx(), T, opt);
    double l1_fine = 0.0;
    for (std::size_t i = 0; i < g2.n(); ++i)
        l1_fine += std::abs(st2.r1[i] - bump.value(g2.x(i) + T)) * g2.dx();
    CHECK(l1_fine < l1);
    CHECK(l1 / l1_fine > 1.6);
}

TEST_CASE("MUSCL transport reaches close to second order on smooth data") {
    const auto m = WaveSpeedModel::constant(1.0);
    auto opt = RiemannOptions::defaults_for(m, 1.0);
    opt.upwind_order = 2;
    const Profile smooth = Profile::truncated_gaussian(1.0, 0.8, 6.0);
    const double T = 1.0;
    auto error_at = [&](std::size_t n) {
        const Grid g = Grid::symmetric(8.0, n);
        RiemannState st(0.0, Field{g}, Field{g}, sample_profile(smooth, g));
        st = advance(std::move(st), m, 0.45 * g.dx(), T, opt);
        Field exact(g);
        for (std::size_t i = 0; i < g.n(); ++i) exact[i] = smooth.value(g.x(i) - T);
        return l2_distance(st.r2, exact);
    };
    const double e1 = error_at(512);
    const double e2 = error_at(1024);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.7);
}

TEST_CASE("spatially uniform states follow the reduced ODE system") {
    const Grid g = Grid::symmetric(2.0, 32);
    const auto m = WaveSpeedModel::zabusky(2.0);
    auto opt = RiemannOptions::defaults_for(m, 1.0);

    SECTION("symmetric invariants are exact") {
        const double beta = 0.4;
        auto st = uniform_state(g, 0.0, -beta, -beta);
        st = advance(std::move(st), m, 0.01, 0.5, opt);
        REQUIRE(st.alive());
        for (std::size_t i = 0; i < g.n(); ++i) {
            CHECK(st.r1[i] == Catch::Approx(-beta).epsilon(1e-12));
            CHECK(st.u[i] == Catch::Approx(-beta * 0.5).epsilon(1e-10));
        }
    }

    SECTION("asymmetric invariants converge at second order") {
        const oracles::Vec3 y0{-0.3, -0.1, 0.0};
        auto rhs = [&](const oracles::Vec3& y) {
            return oracles::reduced_system_rhs(
                y, [&](double u) { return m.eval_speed(u); },
                [&](double u) { return m.eval_speed_derivative(u); });
        };
        const double T = 0.5;
        const auto exact = oracles::rk4_integrate(rhs, y0, 0.0, T, 20000);

        auto solve_with = [&](double dt) {
            auto st = uniform_state(g, y0[2], y0[0], y0[1]);
            st = advance(std::move(st), m, dt, T, opt);
            REQUIRE(st.alive());
            return oracles::Vec3{st.r1[0], st.r2[0], st.u[0]};
        };
        auto err = [&](const oracles::Vec3& got) {
            double e = 0.0;
            for (int i = 0; i < 3; ++i) e = std::max(e, std::abs(got[i] - exact[i]));
            return e;
        };
        const double e_coarse = err(solve_with(T / 50));
        const double e_fine = err(solve_with(T / 100));
        CHECK(e_coarse / e_fine > 3.0);
        CHECK(e_coarse / e_fine < 5.0);
        CHECK(e_fine < 1e-5);
    }
}

TEST_CASE("sign preservation under one-signed data") {
    const Grid g = Grid::symmetric(6.0, 512);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> amp(0.05, 0.2);
    for (double a : {1.0, 2.0, 4.0}) {
        const auto m = WaveSpeedModel::zabusky(a);
        const Field u0 = sample_profile(Profile::bump(amp(rng) * 0.2, 1.5), g);
        const Field du0 = spatial_derivative(u0);
        Field u1(g);
        const Field pad = sample_profile(Profile::bump(amp(rng), 2.0), g);
        for (std::size_t i = 0; i < g.n(); ++i)
            u1[i] = -(pad[i] + std::abs(m.eval_speed(u0[i]) * du0[i]));
        Scenario s(u0, u1, m, 2.0);
        RiemannState st = initial_riemann_state(s);
        const double scale = std::max(max_abs(st.r1), max_abs(st.r2));
        REQUIRE(max_value(st.r1) <= 0.0);
        REQUIRE(max_value(st.r2) <= 0.0);

        auto opt = RiemannOptions::defaults_for(m, scale);
        double worst = -kInf;
        while (st.alive() && st.t < 1.5) {
            const double dt = cfl_timestep(st, m, opt);
            auto [next, stats] = step(st, m, dt, opt);
            st = std::move(next);
            worst = std::max({worst, max_value(st.r1), max_value(st.r2)});
        }
        CHECK(worst <= 1e-8 * scale);
    }
}

TEST_CASE("gradient reconstruction inverts the invariant map") {
    const Grid g = Grid::symmetric(2.0, 64);
    const auto unit = WaveSpeedModel::constant(1.0);
    {
        const auto [ut, ux] = reconstruct_gradients(uniform_state(g, 0.0, 1.0, 1.0), unit);
        for (std::size_t i = 0; i < g.n(); ++i) {
            CHECK(ut[i] == Catch::Approx(1.0));
            CHECK(ux[i] == Catch::Approx(0.0));
        }
    }
    {
        const auto [ut, ux] = reconstruct_gradients(uniform_state(g, 0.0, 1.0, -1.0), unit);
        for (std::size_t i = 0; i < g.n(); ++i) {
            CHECK(ut[i] == Catch::Approx(0.0));
            CHECK(ux[i] == Catch::Approx(1.0));
        }
    }
    CHECK_THROWS_AS(
        reconstruct_gradients(uniform_state(g, -0.9999, 0.0, 0.0), WaveSpeedModel::zabusky(2.0),
                              1e-3),
        DegeneracyError);
}

TEST_CASE("characteristic tracing through frozen states") {
    const Grid g = Grid::symmetric(4.0, 256);

    auto frozen_history = [&](double u_value, int levels, double t_max) {
        std::vector<RiemannState> h;
        for (int k = 0; k <= levels; ++k)
            h.emplace_back(t_max * k / levels, Field(g, u_value), Field(g, 0.1), Field(g, -0.2));
        return h;
    };

    SECTION("unit speed, straight lines") {
        const auto m = WaveSpeedModel::constant(1.0);
        const auto plus =
            trace_characteristic(frozen_history(0.0, 20, 2.0), m, CharacteristicSign::Plus, 0.0);
        CHECK(plus.path.back().second == Catch::Approx(2.0).margin(1e-10));
        const auto minus =
            trace_characteristic(frozen_history(0.0, 20, 2.0), m, CharacteristicSign::Minus, 0.0);
        CHECK(minus.path.back().second == Catch::Approx(-2.0).margin(1e-10));
        CHECK(plus.u_along.size() == plus.path.size());
        CHECK(plus.r1_along.front() == Catch::Approx(0.1));
        CHECK(plus.r2_along.front() == Catch::Approx(-0.2));
    }

    SECTION("frozen half speed") {
        const auto m = WaveSpeedModel::zabusky(2.0); // c(-1/2) = 1/2
        const auto probe =
            trace_characteristic(frozen_history(-0.5, 20, 2.0), m, CharacteristicSign::Plus, 0.0);
        CHECK(probe.path.back().second == Catch::Approx(1.0).margin(1e-10));
    }

    SECTION("leaving the grid raises OutOfDomain") {
        const auto m = WaveSpeedModel::constant(1.0);
        CHECK_THROWS_AS(
            trace_characteristic(frozen_history(0.0, 80, 8.0), m, CharacteristicSign::Plus, 0.5),
            OutOfDomainError);
    }
}

TEST_CASE("stop events seal the state") {
    const Grid g = Grid::symmetric(2.0, 64);
    const auto m = WaveSpeedModel::zabusky(2.0);

    SECTION("degeneracy") {
        auto opt = RiemannOptions::defaults_for(m, 1.0);
        auto st = uniform_state(g, -1.0 + 1e-5, 0.0, 0.0); // c = 1e-5 < eps_deg
        const auto [next, stats] = step(st, m, 1e-3, opt);
        CHECK(next.stopped_degenerate);
        CHECK_FALSE(next.alive());
        CHECK_THROWS_AS(step(next, m, 1e-3, opt), DomainError);
    }

    SECTION("blow-up threshold") {
        auto opt = RiemannOptions::defaults_for(m, 1.0);
        opt.m_blow = 0.5;
        RiemannState st(0.0, Field{g}, sample_profile(Profile::bump(1.0, 1.0), g), Field{g});
        const auto [next, stats] = step(st, m, 1e-3, opt);
        CHECK(next.stopped_blowup);
    }
}
