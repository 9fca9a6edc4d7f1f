#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "gcflow/errors.hpp"
#include "gcflow/flow_operator.hpp"
#include "gcflow/graph_geometry.hpp"
#include "gcflow/report.hpp"
#include "gcflow/sphere_grid.hpp"

namespace gcflow {

struct FlowParams {
    double alpha = 0.5;
    double cfl = 0.4;
    double t_end = -1.0;                 // one of t_end / s_end must be set
    double s_end = -1.0;
    double dt_min = 1e-12;
    double dt_max = 1.0;
    double eps_convex = 1e-8;
    double c_rescale = std::numeric_limits<double>::quiet_NaN(); // NaN: midpoint of phi0
    int monitor_every = 10;
    double neumann_tol_factor = 10.0;    // initial compatibility: |D_mu phi0| <= factor * h^2

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("FlowParams: alpha must lie in (0,1)");
        if (!(cfl > 0.0 && cfl <= 0.5))
            throw std::invalid_argument("FlowParams: cfl must lie in (0, 0.5]");
        if (!(dt_min > 0.0))
            throw std::invalid_argument("FlowParams: dt_min must be positive");
        if (t_end <= 0.0 && s_end <= 0.0)
            throw std::invalid_argument("FlowParams: one of t_end / s_end must be positive");
    }
};

// Radius of the exact radial solution; the rescaling clock. Closed form,
// never integrated.
inline double theta(double c, double t, double alpha) {
    return std::pow((1.0 - alpha) * t + std::exp((1.0 - alpha) * c), 1.0 / (1.0 - alpha));
}

// Exact spatially-constant solution phi(t) with phi(0) = c; equals log Theta.
inline double radial_solution(double t, double alpha, double c) {
    return std::log((1.0 - alpha) * t + std::exp((1.0 - alpha) * c)) / (1.0 - alpha);
}

// Fill the ghost layer: mirror reflection across the boundary (D_mu phi = 0)
// and across the axis (even radial profile).
inline void apply_neumann_bc(GraphField& f, const Grid& grid) {
    if (static_cast<int>(f.phi.size()) != grid.num_nodes())
        throw std::invalid_argument("apply_neumann_bc: field size mismatch");
    f.ghost.resize(grid.num_ghost());
    const int nr = grid.spec.nr;
    if (grid.spec.n == 1) {
        f.ghost[0] = f.phi[1];
        f.ghost[1] = f.phi[nr - 2];
    } else if (grid.spec.mode == Mode::axisymmetric) {
        f.ghost[0] = f.phi[1];        // axis mirror
        f.ghost[1] = f.phi[nr - 2];   // Neumann reflection
    } else {
        for (int j = 0; j < grid.spec.ntheta; ++j)
            f.ghost[j] = f.phi[grid.ring_index(nr - 1, j)];
    }
    f.ghost_valid = true;
}

// Explicit parabolic stability bound:
//   dt = cfl / max_nodes sum_{i,j} |Q^{ij}| / (s_i s_j)
// with metric spacings s_r = h_r and s_theta = sin(r) h_theta. The
// axisymmetric reduction carries the angular diagonal at the radial spacing.
inline double stable_dt(const LinearizationData& lin, const Grid& grid, const FlowParams& params) {
    double worst = 0.0;
    const double hr = grid.hr;
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const auto& q = lin.Qij[i];
        double sum;
        if (grid.spec.n == 1) {
            sum = std::abs(q.rr) / (hr * hr);
        } else if (!grid.is_full2d()) {
            sum = (std::abs(q.rr) + std::abs(q.tt)) / (hr * hr);
        } else {
            const double st = grid.nodes[i].cls == NodeClass::axis
                                  ? hr
                                  : std::sin(grid.nodes[i].r) * grid.htheta;
            sum = std::abs(q.rr) / (hr * hr) + 2.0 * std::abs(q.rt) / (hr * st) +
                  std::abs(q.tt) / (st * st);
        }
        worst = std::max(worst, sum);
    }
    const double dt = params.cfl / worst;
    if (dt < params.dt_min)
        throw DtUnderflowError("stable_dt: required dt " + std::to_string(dt) +
                               " below dt_min (stiffness blow-up)");
    return std::min(dt, params.dt_max);
}

struct FlowState {
    GraphField phi;
    double t = 0.0;
    double s = 0.0;
    long step = 0;
    double theta = 1.0;
};

namespace detail {

struct StepData {
    DerivativeSet d;
    WField wf;
    SpeedField sp;
    LinearizationData lin;
    double dt = 0.0;
};

inline StepData prepare_step(FlowState& state, const FlowParams& params, const Grid& grid) {
    apply_neumann_bc(state.phi, grid);
    StepData sd;
    sd.d = compute_derivatives(state.phi, grid);
    sd.wf = compute_w(sd.d, grid.spec.n);
    if (sd.wf.global_min_eig() <= params.eps_convex)
        throw NonAdmissibleError("flow state lost admissibility: min_eig(w) = " +
                                 std::to_string(sd.wf.global_min_eig()));
    sd.sp = evaluate_Q(state.phi, sd.wf, grid, params.alpha, sd.d);
    sd.lin = linearize_Q(state.phi, sd.wf, grid, params.alpha, sd.d, sd.sp);
    sd.dt = stable_dt(sd.lin, grid, params);
    return sd;
}

inline void advance(FlowState& state, const StepData& sd, const FlowParams& params, double dt) {
    for (int i = 0; i < static_cast<int>(state.phi.phi.size()); ++i) {
        state.phi.phi[i] += dt * sd.sp.Q[i];
        if (!std::isfinite(state.phi.phi[i]))
            throw NaNDetectedError("non-finite phi at node " + std::to_string(i));
    }
    state.phi.ghost_valid = false;
    const double t_mid = state.t + 0.5 * dt;
    state.s += std::pow(theta(params.c_rescale, t_mid, params.alpha), params.alpha - 1.0) * dt;
    state.t += dt;
    state.phi.t = state.t;
    state.theta = theta(params.c_rescale, state.t, params.alpha);
    ++state.step;
}

} // namespace detail

// One forward-Euler update with the stability-limited dt.
inline FlowState step_explicit(FlowState state, const FlowParams& params, const Grid& grid) {
    const auto sd = detail::prepare_step(state, params, grid);
    detail::advance(state, sd, params, sd.dt);
    return state;
}

struct FlowResult {
    EstimateReport report;
    FlowState final_state;
    GraphField initial;
};

using MonitorCallback = std::function<void(const FlowState&, const EstimateSample&)>;

inline double resolve_c_rescale(const GraphField& initial, const FlowParams& params) {
    const auto [lo, hi] = std::minmax_element(initial.phi.begin(), initial.phi.end());
    if (std::isnan(params.c_rescale)) return 0.5 * (*lo + *hi);
    if (params.c_rescale < *lo || params.c_rescale > *hi)
        throw std::invalid_argument("c_rescale must lie in [min phi0, max phi0]");
    return params.c_rescale;
}

inline FlowResult run_flow(const GraphField& initial, FlowParams params, const Grid& grid,
                           const MonitorCallback& monitor = {}) {
    params.validate();
    params.c_rescale = resolve_c_rescale(initial, params);
    const int n = grid.spec.n;

    FlowState state;
    state.phi = initial;
    state.phi.t = 0.0;
    state.theta = theta(params.c_rescale, 0.0, params.alpha);

    {
        const double compat = max_boundary_outward_derivative(initial, grid);
        const double tol = params.neumann_tol_factor * grid.hr * grid.hr;
        if (compat > tol)
            throw InitialDataIncompatibleError(
                "initial data violates D_mu phi = 0: one-sided derivative " +
                std::to_string(compat) + " > " + std::to_string(tol));
    }

    FlowResult result;
    result.initial = initial;

    auto record = [&](const detail::StepData& sd) {
        EstimateSample r;
        r.t = state.t;
        r.s = state.s;
        r.theta = state.theta;
        const double th_fac = std::pow(state.theta, 1.0 - params.alpha);
        r.m_min = std::numeric_limits<double>::infinity();
        r.m_max = -r.m_min;
        r.detw_min = std::numeric_limits<double>::infinity();
        r.detw_max = -r.detw_min;
        r.mineig_w = std::numeric_limits<double>::infinity();
        r.phi_min = std::numeric_limits<double>::infinity();
        r.phi_max = -r.phi_min;
        for (int i = 0; i < grid.num_nodes(); ++i) {
            r.sup_grad_phi = std::max(r.sup_grad_phi, std::sqrt(sd.d.grad[i].norm2(n)));
            const double M = sd.sp.Q[i] * th_fac;
            r.m_min = std::min(r.m_min, M);
            r.m_max = std::max(r.m_max, M);
            r.detw_min = std::min(r.detw_min, sd.wf.det_w[i]);
            r.detw_max = std::max(r.detw_max, sd.wf.det_w[i]);
            r.mineig_w = std::min(r.mineig_w, sd.wf.min_eig[i]);
            r.phi_min = std::min(r.phi_min, state.phi.phi[i]);
            r.phi_max = std::max(r.phi_max, state.phi.phi[i]);
        }
        r.osc_phitilde = r.phi_max - r.phi_min;
        r.sup_grad_phitilde = r.sup_grad_phi; // D(phi - log Theta) = D phi
        r.bdry_ortho_residual = boundary_orthogonality_residual(state.phi, grid);
        result.report.samples.push_back(r);
        if (monitor) monitor(state, r);
    };

    const long max_steps = 200'000'000L;
    while (true) {
        auto sd = detail::prepare_step(state, params, grid);
        if (state.step % params.monitor_every == 0) record(sd);

        if (params.s_end > 0.0 && state.s >= params.s_end) break;
        bool done = false;
        double dt = sd.dt;
        if (params.t_end > 0.0 && state.t + dt >= params.t_end) {
            dt = params.t_end - state.t;
            done = true;
            if (dt <= 0.0) break;
        }
        detail::advance(state, sd, params, dt);
        if (done) break;
        if (state.step > max_steps) throw std::runtime_error("run_flow: step budget exceeded");
    }
    // final sample at the stopping time
    if (result.report.samples.empty() || result.report.samples.back().t < state.t) {
        auto sd = detail::prepare_step(state, params, grid);
        record(sd);
    }

    // round-sphere summary of the final rescaled state
    {
        double mean = 0.0;
        std::vector<double> ut(grid.num_nodes());
        for (int i = 0; i < grid.num_nodes(); ++i) {
            ut[i] = std::exp(state.phi.phi[i]) / state.theta;
            mean += ut[i];
        }
        mean /= grid.num_nodes();
        double var = 0.0;
        for (double x : ut) var += (x - mean) * (x - mean);
        var /= grid.num_nodes();
        result.report.final_u_tilde_std_over_mean = std::sqrt(var) / mean;
    }

    result.final_state = std::move(state);
    return result;
}

} // namespace gcflow
