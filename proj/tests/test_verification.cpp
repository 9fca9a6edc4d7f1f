#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gcflow/verification.hpp"

using namespace gcflow;

namespace {

Grid axisym_grid(int nr = 33) {
    DomainSpec s;
    s.n = 2;
    s.nr = nr;
    return build_grid(s);
}

// synthetic trajectory with prescribed per-sample values
EstimateReport synthetic(int m, auto&& fill) {
    EstimateReport rep;
    for (int k = 0; k < m; ++k) {
        EstimateSample r;
        r.t = 0.5 * k;
        r.s = 0.25 * k;
        fill(k, r);
        rep.samples.push_back(r);
    }
    return rep;
}

} // namespace

TEST_CASE("C0 sandwich check") {
    const double alpha = 0.5;
    auto radial_pair = [&](int k, EstimateSample& r) {
        r.phi_min = radial_solution(r.t, alpha, -0.1);
        r.phi_max = radial_solution(r.t, alpha, 0.1);
    };
    REQUIRE(check_c0_sandwich(synthetic(8, radial_pair), alpha).pass);

    auto escapes = [&](int k, EstimateSample& r) {
        radial_pair(k, r);
        if (k == 5) r.phi_max += 0.01; // pokes above the upper barrier
    };
    REQUIRE_FALSE(check_c0_sandwich(synthetic(8, escapes), alpha).pass);
}

TEST_CASE("M bracket check") {
    auto ok = [](int k, EstimateSample& r) {
        r.m_min = 0.9 + 0.01 * k; // contracts toward 1
        r.m_max = 1.2 - 0.01 * k;
    };
    REQUIRE(check_m_bracket(synthetic(6, ok)).pass);

    auto breaks_out = [](int k, EstimateSample& r) {
        r.m_min = 0.9;
        r.m_max = k == 4 ? 1.3 : 1.2; // exceeds the initial hull
    };
    REQUIRE_FALSE(check_m_bracket(synthetic(6, breaks_out)).pass);
}

TEST_CASE("gradient monotonicity check") {
    auto decaying = [](int k, EstimateSample& r) { r.sup_grad_phi = 0.1 * std::exp(-0.3 * k); };
    REQUIRE(check_gradient_monotone(synthetic(8, decaying)).pass);

    auto rebound = [](int k, EstimateSample& r) {
        r.sup_grad_phi = k == 5 ? 0.09 : 0.1 * std::exp(-0.3 * k);
    };
    REQUIRE_FALSE(check_gradient_monotone(synthetic(8, rebound)).pass);
}

TEST_CASE("det w window check") {
    auto inside = [](int, EstimateSample& r) {
        r.detw_min = 0.7;
        r.detw_max = 1.4;
    };
    REQUIRE(check_detw_bounds(synthetic(4, inside)).pass);

    auto degenerates = [](int k, EstimateSample& r) {
        r.detw_min = k == 3 ? 1e-4 : 0.7;
        r.detw_max = 1.4;
    };
    REQUIRE_FALSE(check_detw_bounds(synthetic(4, degenerates)).pass);
}

TEST_CASE("rescaled convergence fit recovers a planted decay rate") {
    const double lambda = 1.7;
    auto exponential = [&](int k, EstimateSample& r) {
        r.sup_grad_phitilde = 0.1 * std::exp(-lambda * r.s);
        r.osc_phitilde = 0.05 * std::exp(-lambda * r.s);
    };
    EstimateReport rep = synthetic(24, exponential);
    rep.final_u_tilde_std_over_mean = 1e-8;
    ConvergenceFit fit;
    const auto res = check_rescaled_convergence(rep, {}, &fit);
    REQUIRE(res.pass);
    REQUIRE(fit.lambda_hat == Catch::Approx(lambda).epsilon(1e-10));
    REQUIRE(fit.r_squared == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rescaled convergence requires a usable decay window") {
    auto exponential = [&](int k, EstimateSample& r) {
        r.sup_grad_phitilde = 0.1 * std::exp(-r.s);
        r.osc_phitilde = 0.05 * std::exp(-r.s);
    };
    EstimateReport rep = synthetic(3, exponential); // too few samples
    REQUIRE_THROWS_AS(check_rescaled_convergence(rep), InsufficientDecayWindowError);
}

TEST_CASE("comparison check on ordered initial data") {
    const Grid g = axisym_grid();
    FlowParams p;
    p.alpha = 0.5;
    p.t_end = 1.0;
    GraphField lo = bump_field(g, 0.0, 0.05, g.spec.rho);
    GraphField hi = lo;
    for (double& x : hi.phi) x += 0.1;
    const auto res = check_comparison(lo, hi, p, g);
    REQUIRE(res.pass);
    REQUIRE(res.value > 0.0);
}

TEST_CASE("default scenario battery is green and fast") {
    BatteryConfig cfg;
    cfg.nr = 48; // keep unit-test runtime modest; acceptance uses the full size
    const auto rep = scenario_battery(cfg);
    for (const auto& s : rep.scenarios) {
        INFO(s.name << ": " << s.detail);
        CHECK(s.pass);
    }
    REQUIRE(rep.all_pass());
}

TEST_CASE("battery detects a seeded geometry defect") {
    BatteryConfig cfg;
    cfg.nr = 48;
    cfg.mutation = GeometryMutation::h_sign;
    const auto rep = scenario_battery(cfg);
    REQUIRE_FALSE(rep.all_pass());
    bool geometry_failed = false;
    for (const auto& s : rep.scenarios)
        if (!s.pass) {
            // the defect must be caught by the geometry oracle, nothing else
            REQUIRE(s.name == "geometry_oracle");
            geometry_failed = true;
        }
    REQUIRE(geometry_failed);
}

TEST_CASE("battery sweeps alpha") {
    for (double alpha : {0.25, 0.75}) {
        BatteryConfig cfg;
        cfg.alpha = alpha;
        cfg.nr = 32;
        const auto rep = scenario_battery(cfg);
        for (const auto& s : rep.scenarios) {
            INFO("alpha " << alpha << ", " << s.name << ": " << s.detail);
            CHECK(s.pass);
        }
        REQUIRE(rep.all_pass());
    }
}
