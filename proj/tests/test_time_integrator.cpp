#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "gcflow/time_integrator.hpp"

using namespace gcflow;

namespace {

Grid axisym_grid(int nr = 33) {
    DomainSpec s;
    s.n = 2;
    s.nr = nr;
    return build_grid(s);
}

} // namespace

TEST_CASE("Theta closed form") {
    REQUIRE(theta(0.7, 0.0, 0.3) == Catch::Approx(std::exp(0.7)).epsilon(1e-14));
    // dTheta/dt = Theta^alpha, checked by central differences
    for (double alpha : {0.25, 0.5, 0.75}) {
        const double t = 1.3, c = 0.2, dt = 1e-6;
        const double fd = (theta(c, t + dt, alpha) - theta(c, t - dt, alpha)) / (2.0 * dt);
        REQUIRE(fd == Catch::Approx(std::pow(theta(c, t, alpha), alpha)).epsilon(1e-8));
    }
    // radial_solution = log Theta
    REQUIRE(radial_solution(2.0, 0.4, 0.1) ==
            Catch::Approx(std::log(theta(0.1, 2.0, 0.4))).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
    FlowParams p;
    p.t_end = 1.0;
    REQUIRE_NOTHROW(p.validate());
    p.alpha = 1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.alpha = 0.5;
    p.cfl = 0.7;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.cfl = 0.4;
    p.t_end = -1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("Neumann ghost layer is the mirror reflection") {
    const Grid g = axisym_grid(17);
    GraphField f = GraphField::constant(g, 0.0);
    for (int i = 0; i < g.num_nodes(); ++i) f.phi[i] = 0.1 * i;
    apply_neumann_bc(f, g);
    REQUIRE(f.ghost_valid);
    REQUIRE(f.ghost[0] == f.phi[1]);
    REQUIRE(f.ghost[1] == f.phi[g.num_nodes() - 2]);
}

TEST_CASE("stable dt reproduces the textbook bound for radial data") {
    // phi = const: Q = e^{(alpha-1)c}, Q^{ij} = (alpha/n) Q I, so
    // dt = cfl h^2 / (2 (alpha/n) Q) on the axisymmetric line
    const Grid g = axisym_grid();
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 1.0;
    const double c = 0.3;
    GraphField f = GraphField::constant(g, c);
    apply_neumann_bc(f, g);
    const auto d = compute_derivatives(f, g);
    const auto wf = compute_w(d, 2);
    const auto sp = evaluate_Q(f, wf, g, p.alpha, d);
    const auto lin = linearize_Q(f, wf, g, p.alpha, d, sp);
    const double expected =
        p.cfl * g.hr * g.hr / (2.0 * (p.alpha / 2.0) * std::exp((p.alpha - 1.0) * c));
    REQUIRE(stable_dt(lin, g, p) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("radial runs reproduce the closed-form solution") {
    for (int n : {1, 2}) {
        for (double alpha : {0.25, 0.5, 0.75}) {
            DomainSpec s;
            s.n = n;
            s.nr = 48;
            const Grid g = build_grid(s);
            FlowParams p;
            p.alpha = alpha;
            p.t_end = 1.0;
            const double c = 0.2;
            const auto res = run_flow(GraphField::constant(g, c), p, g);
            const double exact = radial_solution(1.0, alpha, c);
            for (double phi : res.final_state.phi.phi)
                REQUIRE(phi == Catch::Approx(exact).margin(1e-3));
            REQUIRE(res.final_state.t == Catch::Approx(1.0).epsilon(1e-14));
            // M = Q Theta^{1-alpha} = 1 exactly along the radial flow
            for (const auto& r : res.report.samples) {
                REQUIRE(r.m_min == Catch::Approx(1.0).margin(1e-3));
                REQUIRE(r.m_max == Catch::Approx(1.0).margin(1e-3));
                REQUIRE(r.osc_phitilde < 1e-12);
            }
        }
    }
}

TEST_CASE("slow time s matches its closed form along radial runs") {
    // With c_rescale = c: ds/dt = Theta^{alpha-1}, so s(t) = log(Theta(t)) - c
    const Grid g = axisym_grid();
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 3.0;
    const double c = 0.1;
    const auto res = run_flow(GraphField::constant(g, c), p, g);
    const double exact = radial_solution(3.0, p.alpha, c) - c;
    REQUIRE(res.final_state.s == Catch::Approx(exact).margin(1e-6));
}

TEST_CASE("s_end stopping criterion") {
    const Grid g = axisym_grid();
    FlowParams p;
    p.alpha = 0.5;
    p.s_end = 1.0;
    const auto res = run_flow(GraphField::constant(g, 0.0), p, g);
    REQUIRE(res.final_state.s >= 1.0);
    // overshoot is at most one step of ds
    REQUIRE(res.final_state.s < 1.0 + 1e-2);
}

TEST_CASE("runs are bitwise deterministic") {
    const Grid g = axisym_grid();
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 0.5;
    const GraphField f0 = bump_field(g, 0.0, 0.05, g.spec.rho);
    const auto r1 = run_flow(f0, p, g);
    const auto r2 = run_flow(f0, p, g);
    REQUIRE(r1.final_state.phi.phi == r2.final_state.phi.phi);
    std::ostringstream a, b;
    r1.report.write_csv(a);
    r2.report.write_csv(b);
    REQUIRE(a.str() == b.str());
}

TEST_CASE("report samples are strictly increasing in t and end at t_end") {
    const Grid g = axisym_grid();
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 0.4;
    const auto res = run_flow(bump_field(g, 0.0, 0.05, g.spec.rho), p, g);
    REQUIRE(res.report.samples.size() >= 2);
    for (size_t i = 1; i < res.report.samples.size(); ++i)
        REQUIRE(res.report.samples[i].t > res.report.samples[i - 1].t);
    REQUIRE(res.report.samples.back().t == Catch::Approx(0.4).epsilon(1e-14));
    // theta column is the closed form, never integrated
    for (const auto& r : res.report.samples)
        REQUIRE(r.theta == theta(resolve_c_rescale(res.initial, p), r.t, p.alpha));
}

TEST_CASE("incompatible initial data is rejected up front") {
    const Grid g = axisym_grid();
    GraphField f = GraphField::constant(g, 0.0);
    for (int i = 0; i < g.num_nodes(); ++i) f.phi[i] = 0.3 * g.nodes[i].r;
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 0.1;
    REQUIRE_THROWS_AS(run_flow(f, p, g), InitialDataIncompatibleError);
}

TEST_CASE("c_rescale resolution") {
    const Grid g = axisym_grid();
    const GraphField f = bump_field(g, 0.0, 0.05, g.spec.rho);
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 0.1;
    REQUIRE(resolve_c_rescale(f, p) == Catch::Approx(0.025));
    p.c_rescale = 1.0; // outside [min, max] of phi0
    REQUIRE_THROWS_AS(resolve_c_rescale(f, p), std::invalid_argument);
    p.c_rescale = 0.01;
    REQUIRE(resolve_c_rescale(f, p) == 0.01);
}

TEST_CASE("single explicit step advances phi by dt Q") {
    const Grid g = axisym_grid();
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 1.0;
    p.c_rescale = 0.0;
    FlowState st;
    st.phi = GraphField::constant(g, 0.0);
    const FlowState next = step_explicit(st, p, g);
    REQUIRE(next.step == 1);
    REQUIRE(next.t > 0.0);
    // radial: Q = 1 everywhere, so phi = dt at every node
    for (double phi : next.phi.phi) REQUIRE(phi == Catch::Approx(next.t).epsilon(1e-13));
}

TEST_CASE("full2d radial run stays radial") {
    DomainSpec s;
    s.n = 2;
    s.mode = Mode::full2d;
    s.nr = 12;
    s.ntheta = 16;
    const Grid g = build_grid(s);
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 0.5;
    const auto res = run_flow(GraphField::constant(g, 0.0), p, g);
    const double exact = radial_solution(0.5, 0.5, 0.0);
    for (double phi : res.final_state.phi.phi)
        REQUIRE(phi == Catch::Approx(exact).margin(1e-3));
    REQUIRE(res.report.samples.back().osc_phitilde < 1e-12);
}
