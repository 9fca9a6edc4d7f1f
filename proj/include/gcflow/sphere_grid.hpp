#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "gcflow/errors.hpp"
#include "gcflow/small_tensor.hpp"

namespace gcflow {

// Discretization of a geodesic cap Omega in S^n (n = 1, 2).
//
//   n=1:          the arc s in [-rho, rho], two boundary endpoints.
//   axisymmetric: the radial line r in [0, rho] of a cap in S^2.
//   full2d:       polar tensor grid (r, theta), pole as a single axis node.

enum class Mode { axisymmetric, full2d };

enum class NodeClass { interior, boundary, axis };

struct DomainSpec {
    int n = 2;
    double rho = std::numbers::pi / 4.0;
    Mode mode = Mode::axisymmetric;
    int nr = 64;
    int ntheta = 64; // full2d only

    void validate() const {
        if (n != 1 && n != 2)
            throw std::invalid_argument("DomainSpec: n must be 1 or 2");
        if (!(rho > 0.0 && rho < std::numbers::pi / 2.0))
            throw std::invalid_argument("DomainSpec: rho must lie in (0, pi/2)");
        if (nr < 8)
            throw std::invalid_argument("DomainSpec: nr must be >= 8");
        if (n == 2 && mode == Mode::full2d) {
            if (ntheta < 8 || ntheta % 2 != 0)
                throw std::invalid_argument("DomainSpec: ntheta must be >= 8 and even");
        }
    }
};

// Round-metric data in polar coordinates (r, theta). For n=1 the metric is
// the scalar 1 and all Christoffel symbols vanish.
struct MetricData {
    double sigma_rr = 1.0;
    double sigma_tt = 1.0;       // sin^2 r for n=2
    double sigma_inv_rr = 1.0;
    double sigma_inv_tt = 1.0;
    double gamma_r_tt = 0.0;     // Gamma^r_{theta theta} = -sin r cos r
    double gamma_t_rt = 0.0;     // Gamma^theta_{r theta} = cot r
    double sqrt_det_sigma = 1.0;
    bool degenerate = false;     // axis/pole node
};

struct Node {
    double r = 0.0;      // arclength for n=1 (in [-rho, rho]), polar radius otherwise
    double theta = 0.0;
    NodeClass cls = NodeClass::interior;
};

class Grid {
public:
    DomainSpec spec;
    std::vector<Node> nodes;
    std::vector<MetricData> metric;
    double hr = 0.0;
    double htheta = 0.0;

    int num_nodes() const { return static_cast<int>(nodes.size()); }

    int num_ghost() const {
        if (spec.n == 1 || spec.mode == Mode::axisymmetric) return 2;
        return spec.ntheta;
    }

    bool is_full2d() const { return spec.n == 2 && spec.mode == Mode::full2d; }

    // full2d addressing: node 0 is the pole, ring k = 1..nr at r = k*hr.
    int ring_index(int k, int j) const { return 1 + (k - 1) * spec.ntheta + j; }
    int wrap_theta(int j) const { return (j % spec.ntheta + spec.ntheta) % spec.ntheta; }
};

// The evolving scalar unknown phi = log u, with an explicit ghost layer that
// must be filled (apply_neumann_bc) before any derivative stencil is used.
struct GraphField {
    std::vector<double> phi;
    std::vector<double> ghost;
    bool ghost_valid = false;
    double t = 0.0;

    static GraphField constant(const Grid& grid, double value, double time = 0.0) {
        GraphField f;
        f.phi.assign(grid.num_nodes(), value);
        f.ghost.assign(grid.num_ghost(), 0.0);
        f.t = time;
        return f;
    }
};

// Neumann-compatible radial bump: base + amplitude * (1 + cos(pi r / width)) / 2,
// zero slope at the axis and (for width = rho) at the boundary.
inline GraphField bump_field(const Grid& grid, double base, double amplitude, double width) {
    GraphField f = GraphField::constant(grid, base);
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const double r = std::abs(grid.nodes[i].r);
        const double x = std::min(r / width, 1.0);
        f.phi[i] = base + amplitude * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
    }
    return f;
}

inline Grid build_grid(const DomainSpec& spec) {
    spec.validate();
    Grid g;
    g.spec = spec;

    auto metric_at = [&](double r) {
        MetricData m;
        if (spec.n == 1) return m;
        const double s = std::sin(r);
        const double c = std::cos(r);
        m.sigma_tt = s * s;
        m.gamma_r_tt = -s * c;
        if (r > 0.0) {
            m.sigma_inv_tt = 1.0 / (s * s);
            m.gamma_t_rt = c / s;
            m.sqrt_det_sigma = s;
        } else {
            m.degenerate = true;
            m.sigma_inv_tt = 0.0;
            m.sqrt_det_sigma = 0.0;
        }
        return m;
    };

    if (spec.n == 1) {
        g.hr = 2.0 * spec.rho / (spec.nr - 1);
        for (int i = 0; i < spec.nr; ++i) {
            const double s = -spec.rho + i * g.hr;
            NodeClass cls = (i == 0 || i == spec.nr - 1) ? NodeClass::boundary : NodeClass::interior;
            g.nodes.push_back({s, 0.0, cls});
            g.metric.push_back(MetricData{});
        }
        return g;
    }

    if (spec.mode == Mode::axisymmetric) {
        g.hr = spec.rho / (spec.nr - 1);
        for (int i = 0; i < spec.nr; ++i) {
            const double r = i * g.hr;
            NodeClass cls = NodeClass::interior;
            if (i == 0) cls = NodeClass::axis;
            if (i == spec.nr - 1) cls = NodeClass::boundary;
            g.nodes.push_back({r, 0.0, cls});
            g.metric.push_back(metric_at(r));
        }
        return g;
    }

    // full2d: pole node + nr rings, boundary ring at r = rho.
    g.hr = spec.rho / spec.nr;
    g.htheta = 2.0 * std::numbers::pi / spec.ntheta;
    g.nodes.push_back({0.0, 0.0, NodeClass::axis});
    g.metric.push_back(metric_at(0.0));
    for (int k = 1; k <= spec.nr; ++k) {
        const double r = k * g.hr;
        const NodeClass cls = (k == spec.nr) ? NodeClass::boundary : NodeClass::interior;
        for (int j = 0; j < spec.ntheta; ++j) {
            g.nodes.push_back({r, j * g.htheta, cls});
            g.metric.push_back(metric_at(r));
        }
    }
    return g;
}

struct DerivativeSet {
    std::vector<FrameVec> grad;
    std::vector<FrameSym> hess;
};

namespace detail {

inline void require_ghost(const GraphField& f, const Grid& grid) {
    if (!f.ghost_valid || static_cast<int>(f.ghost.size()) != grid.num_ghost())
        throw GhostLayerError("derivative stencil requires a filled ghost layer");
    if (static_cast<int>(f.phi.size()) != grid.num_nodes())
        throw std::invalid_argument("field size does not match grid");
}

inline DerivativeSet derivatives_line(const GraphField& f, const Grid& grid) {
    // Shared by the n=1 arc and the axisymmetric radial line.
    const int nr = grid.spec.nr;
    const double h = grid.hr;
    const bool axisym = grid.spec.n == 2;
    DerivativeSet d;
    d.grad.resize(nr);
    d.hess.resize(nr);
    auto at = [&](int i) -> double {
        if (i < 0) return f.ghost[0];
        if (i >= nr) return f.ghost[1];
        return f.phi[i];
    };
    for (int i = 0; i < nr; ++i) {
        const double dp = (at(i + 1) - at(i - 1)) / (2.0 * h);
        const double dpp = (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h);
        d.grad[i] = {dp, 0.0};
        d.hess[i].rr = dpp;
        if (axisym) {
            const double r = grid.nodes[i].r;
            // phi_{;theta theta}/sin^2 r = cot(r) phi_r; isotropic limit at the axis.
            d.hess[i].tt = (i == 0) ? dpp : dp * std::cos(r) / std::sin(r);
        }
    }
    if (axisym) d.grad[0] = {0.0, 0.0}; // even profile across the axis
    return d;
}

inline DerivativeSet derivatives_full2d(const GraphField& f, const Grid& grid) {
    const int nr = grid.spec.nr;
    const int nt = grid.spec.ntheta;
    const double h = grid.hr;
    const double ht = grid.htheta;
    DerivativeSet d;
    d.grad.resize(grid.num_nodes());
    d.hess.resize(grid.num_nodes());

    const double pole = f.phi[0];
    auto at = [&](int k, int j) -> double {
        j = grid.wrap_theta(j);
        if (k == 0) return pole;
        if (k == nr + 1) return f.ghost[j];
        return f.phi[grid.ring_index(k, j)];
    };

    for (int k = 1; k <= nr; ++k) {
        const double r = k * h;
        const double sr = std::sin(r);
        const double cr = std::cos(r);
        for (int j = 0; j < nt; ++j) {
            const int idx = grid.ring_index(k, j);
            const double c = at(k, j);
            const double pr = (at(k + 1, j) - at(k - 1, j)) / (2.0 * h);
            const double prr = (at(k + 1, j) - 2.0 * c + at(k - 1, j)) / (h * h);
            const double pt = (at(k, j + 1) - at(k, j - 1)) / (2.0 * ht);
            const double ptt = (at(k, j + 1) - 2.0 * c + at(k, j - 1)) / (ht * ht);
            auto dtheta = [&](int kk) -> double {
                if (kk == 0) return 0.0; // pole ring is constant in theta
                return (at(kk, j + 1) - at(kk, j - 1)) / (2.0 * ht);
            };
            const double prt = (dtheta(k + 1) - dtheta(k - 1)) / (2.0 * h);
            d.grad[idx] = {pr, pt / sr};
            d.hess[idx].rr = prr;
            d.hess[idx].rt = (prt - (cr / sr) * pt) / sr;
            d.hess[idx].tt = ptt / (sr * sr) + (cr / sr) * pr;
        }
    }

    // Pole: fit gradient and Hessian from the geodesic diameters through it.
    // Along the diameter at angle theta_j: value = g.dir + H(dir,dir)/2 * s^2 + ...
    double gx = 0.0, gy = 0.0, a0 = 0.0, b2 = 0.0, c2 = 0.0;
    for (int j = 0; j < nt; ++j) {
        const double th = j * ht;
        const int jo = grid.wrap_theta(j + nt / 2);
        const double fp = f.phi[grid.ring_index(1, j)];
        const double fo = f.phi[grid.ring_index(1, jo)];
        const double dir1 = (fp - fo) / (2.0 * h);
        const double dir2 = (fp - 2.0 * pole + fo) / (h * h);
        gx += dir1 * std::cos(th);
        gy += dir1 * std::sin(th);
        a0 += dir2;
        b2 += dir2 * std::cos(2.0 * th);
        c2 += dir2 * std::sin(2.0 * th);
    }
    gx *= 2.0 / nt;
    gy *= 2.0 / nt;
    a0 /= nt;
    b2 *= 2.0 / nt;
    c2 *= 2.0 / nt;
    // Pole frame: x = (theta=0) direction, y = (theta=pi/2) direction.
    d.grad[0] = {gx, gy};
    d.hess[0] = {a0 + b2, c2, a0 - b2};
    return d;
}

} // namespace detail

inline DerivativeSet compute_derivatives(const GraphField& f, const Grid& grid) {
    detail::require_ghost(f, grid);
    if (grid.is_full2d()) return detail::derivatives_full2d(f, grid);
    return detail::derivatives_line(f, grid);
}

inline std::vector<FrameVec> covariant_gradient(const GraphField& f, const Grid& grid) {
    return compute_derivatives(f, grid).grad;
}

inline std::vector<FrameSym> covariant_hessian(const GraphField& f, const Grid& grid) {
    return compute_derivatives(f, grid).hess;
}

// Outward unit conormal of the domain boundary, in frame components.
inline FrameVec boundary_normal(const Grid& grid, int node) {
    if (grid.nodes[node].cls != NodeClass::boundary)
        throw std::invalid_argument("boundary_normal: not a boundary node");
    if (grid.spec.n == 1)
        return {grid.nodes[node].r > 0.0 ? 1.0 : -1.0, 0.0};
    return {1.0, 0.0};
}

// One-sided, second-order outward derivative D_mu(phi) at a boundary node.
// Deliberately independent of the ghost layer so boundary diagnostics check
// the Neumann condition rather than restating the reflection.
inline double one_sided_outward_derivative(const GraphField& f, const Grid& grid, int node) {
    if (grid.nodes[node].cls != NodeClass::boundary)
        throw std::invalid_argument("one_sided_outward_derivative: not a boundary node");
    const double h = grid.hr;
    auto one_sided = [&](double f0, double f1, double f2) {
        return (3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h);
    };
    if (grid.spec.n == 1 || grid.spec.mode == Mode::axisymmetric) {
        const int nr = grid.spec.nr;
        if (node == nr - 1)
            return one_sided(f.phi[nr - 1], f.phi[nr - 2], f.phi[nr - 3]);
        return one_sided(f.phi[0], f.phi[1], f.phi[2]); // n=1 left endpoint
    }
    const int nr = grid.spec.nr;
    const int j = (node - 1) % grid.spec.ntheta;
    return one_sided(f.phi[grid.ring_index(nr, j)], f.phi[grid.ring_index(nr - 1, j)],
                     f.phi[grid.ring_index(nr - 2, j)]);
}

inline double max_boundary_outward_derivative(const GraphField& f, const Grid& grid) {
    double m = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i)
        if (grid.nodes[i].cls == NodeClass::boundary)
            m = std::max(m, std::abs(one_sided_outward_derivative(f, grid, i)));
    return m;
}

} // namespace gcflow
