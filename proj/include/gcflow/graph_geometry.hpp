#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "gcflow/errors.hpp"
#include "gcflow/small_tensor.hpp"
#include "gcflow/sphere_grid.hpp"

namespace gcflow {

// Geometry of the embedded graph M = { u(x) * x : x in Omega }, u = e^phi.
//
// All closed-form quantities are evaluated from the frame components of the
// covariant derivatives of phi; u-derivatives come from the exact chain rule
// (U_i = u phi_i, U_ij = u(phi_ij + phi_i phi_j)), so the u-form and phi-form
// of the Gauss curvature are two algebraic routes through the same data.

// Test hook: seeded defect in the second fundamental form, used by the
// verification battery's mutation probe.
enum class GeometryMutation { none, h_sign };

struct ShapeData {
    FrameSym g, g_inv, h;
    double v = 1.0;        // sqrt(1 + |D phi|^2)
    double K = 0.0;
    double nu_radial = 0.0;
    FrameVec nu_tang;      // tangential frame components of the unit normal
};

namespace detail {

struct PointGeometry {
    double u, v;
    FrameVec U;     // D u in frame components
    FrameSym Uij;   // covariant Hessian of u
};

inline PointGeometry point_geometry(double phi, const FrameVec& G, const FrameSym& H, int n) {
    PointGeometry p;
    p.u = std::exp(phi);
    p.v = std::sqrt(1.0 + G.norm2(n));
    p.U = {p.u * G.r, p.u * G.t};
    p.Uij = (H + FrameSym::outer(G, n)) * p.u;
    return p;
}

inline FrameSym metric_closed_form(const PointGeometry& p, int n) {
    return FrameSym::identity(n) * (p.u * p.u) + FrameSym::outer(p.U, n);
}

inline FrameSym metric_inverse_closed_form(const PointGeometry& p, int n) {
    const double u2 = p.u * p.u;
    const double denom = u2 * p.v * p.v;
    return (FrameSym::identity(n) - FrameSym::outer(p.U, n) * (1.0 / denom)) * (1.0 / u2);
}

inline FrameSym second_form_closed_form(const PointGeometry& p, int n,
                                        GeometryMutation mut = GeometryMutation::none) {
    const double rank1 = (mut == GeometryMutation::h_sign) ? -2.0 / p.u : 2.0 / p.u;
    return (FrameSym::identity(n) * p.u - p.Uij + FrameSym::outer(p.U, n) * rank1) * (1.0 / p.v);
}

} // namespace detail

inline std::vector<FrameSym> induced_metric(const GraphField& f, const Grid& grid,
                                            std::vector<FrameSym>* g_inv_out = nullptr) {
    const auto d = compute_derivatives(f, grid);
    const int n = grid.spec.n;
    std::vector<FrameSym> g(grid.num_nodes());
    if (g_inv_out) g_inv_out->resize(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const auto p = detail::point_geometry(f.phi[i], d.grad[i], d.hess[i], n);
        g[i] = detail::metric_closed_form(p, n);
        if (g_inv_out) (*g_inv_out)[i] = detail::metric_inverse_closed_form(p, n);
    }
    return g;
}

inline std::vector<FrameSym> second_fundamental_form(const GraphField& f, const Grid& grid,
                                                     GeometryMutation mut = GeometryMutation::none) {
    const auto d = compute_derivatives(f, grid);
    const int n = grid.spec.n;
    std::vector<FrameSym> h(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const auto p = detail::point_geometry(f.phi[i], d.grad[i], d.hess[i], n);
        h[i] = detail::second_form_closed_form(p, n, mut);
    }
    return h;
}

// K = det(h) / det(g), computed through u and its derivatives.
inline std::vector<double> gauss_curvature(const GraphField& f, const Grid& grid,
                                           GeometryMutation mut = GeometryMutation::none) {
    const auto d = compute_derivatives(f, grid);
    const int n = grid.spec.n;
    std::vector<double> K(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const auto p = detail::point_geometry(f.phi[i], d.grad[i], d.hess[i], n);
        const double dh = detail::second_form_closed_form(p, n, mut).det(n);
        if (dh <= 0.0)
            throw NonConvexError("gauss_curvature: det(h) <= 0 at node " + std::to_string(i));
        K[i] = dh / detail::metric_closed_form(p, n).det(n);
    }
    return K;
}

// K = e^{-n phi} (1+|D phi|^2)^{-(n+2)/2} det(w), phi-form (frame det(sigma)=1).
inline std::vector<double> gauss_curvature_log(const GraphField& f, const Grid& grid) {
    const auto d = compute_derivatives(f, grid);
    const int n = grid.spec.n;
    std::vector<double> K(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const FrameSym w = FrameSym::identity(n) - d.hess[i] + FrameSym::outer(d.grad[i], n);
        const double dw = w.det(n);
        if (dw <= 0.0)
            throw NonConvexError("gauss_curvature_log: det(w) <= 0 at node " + std::to_string(i));
        const double g2 = d.grad[i].norm2(n);
        K[i] = std::exp(-n * f.phi[i]) * std::pow(1.0 + g2, -0.5 * (n + 2)) * dw;
    }
    return K;
}

inline std::vector<ShapeData> compute_shape(const GraphField& f, const Grid& grid,
                                            GeometryMutation mut = GeometryMutation::none) {
    const auto d = compute_derivatives(f, grid);
    const int n = grid.spec.n;
    std::vector<ShapeData> out(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        const auto p = detail::point_geometry(f.phi[i], d.grad[i], d.hess[i], n);
        ShapeData s;
        s.g = detail::metric_closed_form(p, n);
        s.g_inv = detail::metric_inverse_closed_form(p, n);
        s.h = detail::second_form_closed_form(p, n, mut);
        s.v = p.v;
        const double dh = s.h.det(n);
        if (dh <= 0.0)
            throw NonConvexError("compute_shape: det(h) <= 0 at node " + std::to_string(i));
        s.K = dh / s.g.det(n);
        s.nu_radial = 1.0 / p.v;
        s.nu_tang = {-d.grad[i].r / p.v, -d.grad[i].t / p.v};
        out[i] = s;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ambient embedding helpers
// ---------------------------------------------------------------------------

// Unit-sphere point for a grid node. n=1 lives in the z=0 plane.
inline Vec3 sphere_point(const Grid& grid, int node) {
    const double r = grid.nodes[node].r;
    const double th = grid.nodes[node].theta;
    if (grid.spec.n == 1) return {std::cos(r), std::sin(r), 0.0};
    return {std::sin(r) * std::cos(th), std::sin(r) * std::sin(th), std::cos(r)};
}

// Outward unit normal of the cone at the ray through a boundary node
// (the conormal of the cap boundary, extended radially).
inline Vec3 cone_normal(const Grid& grid, int node) {
    const double r = grid.nodes[node].r;
    const double th = grid.nodes[node].theta;
    if (grid.spec.n == 1) {
        const double sgn = r > 0.0 ? 1.0 : -1.0;
        return {sgn * -std::sin(r), sgn * std::cos(r), 0.0};
    }
    return {std::cos(r) * std::cos(th), std::cos(r) * std::sin(th), -std::sin(r)};
}

struct OracleNode {
    bool valid = false;
    FrameSym g, h;
    double K = 0.0;
    Vec3 nu{0.0, 0.0, 0.0};
};

namespace detail {

// One-sided second-order stencils for boundary-node oracle derivatives.
inline Vec3 one_sided_d1(const Vec3& f0, const Vec3& f1, const Vec3& f2, double h) {
    return (f0 * 3.0 - f1 * 4.0 + f2) * (1.0 / (2.0 * h));
}
inline Vec3 one_sided_d2(const Vec3& f0, const Vec3& f1, const Vec3& f2, const Vec3& f3, double h) {
    return (f0 * 2.0 - f1 * 5.0 + f2 * 4.0 - f3) * (1.0 / (h * h));
}

inline OracleNode oracle_from_surface_derivs(const Grid& grid, int node, const Vec3& x,
                                             const Vec3& Xr, const Vec3& Xt, const Vec3& Xrr,
                                             const Vec3& Xrt, const Vec3& Xtt) {
    OracleNode o;
    Vec3 nu = cross3(Xr, Xt);
    const double nn = norm3(nu);
    if (nn < 1e-300) throw std::runtime_error("embedding_oracle: degenerate tangents");
    nu = nu * (1.0 / nn);
    if (dot3(nu, x) < 0.0) nu = nu * -1.0;
    const double grr = dot3(Xr, Xr), grt = dot3(Xr, Xt), gtt = dot3(Xt, Xt);
    // h_ij = -<X_ij, nu>: with the outward normal (<nu, x> > 0) a convex
    // surface has h > 0, matching the closed form (unit sphere: h = sigma).
    const double hrr = -dot3(Xrr, nu), hrt = -dot3(Xrt, nu), htt = -dot3(Xtt, nu);
    const double sr = std::sin(grid.nodes[node].r);
    o.g = {grr, grt / sr, gtt / (sr * sr)};
    o.h = {hrr, hrt / sr, htt / (sr * sr)};
    o.K = (hrr * htt - hrt * hrt) / (grr * gtt - grt * grt);
    o.nu = nu;
    o.valid = true;
    return o;
}

} // namespace detail

// Extrinsic verification path: build X = u(x) x numerically and recover
// (g, h, K, nu) by finite differences of the embedding, independent of the
// closed-form route and of the Neumann ghost layer (one-sided at the boundary).
inline std::vector<OracleNode> embedding_oracle(const GraphField& f, const Grid& grid) {
    const int N = grid.num_nodes();
    std::vector<OracleNode> out(N);
    std::vector<double> u(N);
    for (int i = 0; i < N; ++i) u[i] = std::exp(f.phi[i]);
    const double h = grid.hr;

    if (grid.spec.n == 1) {
        std::vector<Vec3> X(N);
        for (int i = 0; i < N; ++i) X[i] = sphere_point(grid, i) * u[i];
        for (int i = 0; i < N; ++i) {
            Vec3 d1, d2;
            if (i == 0) {
                d1 = detail::one_sided_d1(X[0], X[1], X[2], h) * -1.0;
                d2 = detail::one_sided_d2(X[0], X[1], X[2], X[3], h);
            } else if (i == N - 1) {
                d1 = detail::one_sided_d1(X[i], X[i - 1], X[i - 2], h);
                d2 = detail::one_sided_d2(X[i], X[i - 1], X[i - 2], X[i - 3], h);
            } else {
                d1 = (X[i + 1] - X[i - 1]) * (1.0 / (2.0 * h));
                d2 = (X[i + 1] - X[i] * 2.0 + X[i - 1]) * (1.0 / (h * h));
            }
            const Vec3 x = sphere_point(grid, i);
            Vec3 nu{d1[1], -d1[0], 0.0};
            const double nn = norm3(nu);
            if (nn < 1e-300) throw std::runtime_error("embedding_oracle: degenerate tangent");
            nu = nu * (1.0 / nn);
            if (dot3(nu, x) < 0.0) nu = nu * -1.0;
            OracleNode o;
            o.valid = true;
            o.g = {dot3(d1, d1), 0.0, 0.0};
            o.h = {-dot3(d2, nu), 0.0, 0.0};
            o.K = o.h.rr / o.g.rr;
            o.nu = nu;
            out[i] = o;
        }
        return out;
    }

    if (grid.spec.mode == Mode::axisymmetric) {
        const int nr = grid.spec.nr;
        auto deriv_u = [&](int i, double& ur, double& urr) {
            if (i == nr - 1) {
                ur = (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * h);
                urr = (2.0 * u[i] - 5.0 * u[i - 1] + 4.0 * u[i - 2] - u[i - 3]) / (h * h);
            } else {
                ur = (u[i + 1] - u[i - 1]) / (2.0 * h);
                urr = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            }
        };
        for (int i = 1; i < nr; ++i) {
            const double r = grid.nodes[i].r;
            const double sr = std::sin(r), cr = std::cos(r);
            double ur, urr;
            deriv_u(i, ur, urr);
            const Vec3 x{sr, 0.0, cr};
            const Vec3 xr{cr, 0.0, -sr};
            const Vec3 Xr = x * ur + xr * u[i];
            const Vec3 Xt{0.0, u[i] * sr, 0.0};
            const Vec3 Xrr = x * (urr - u[i]) + xr * (2.0 * ur);
            const Vec3 Xrt{0.0, ur * sr + u[i] * cr, 0.0};
            const Vec3 Xtt{-u[i] * sr, 0.0, 0.0};
            out[i] = detail::oracle_from_surface_derivs(grid, i, x, Xr, Xt, Xrr, Xrt, Xtt);
        }
        return out;
    }

    // full2d
    const int nr = grid.spec.nr;
    const int nt = grid.spec.ntheta;
    const double ht = grid.htheta;
    std::vector<Vec3> X(N);
    for (int i = 0; i < N; ++i) X[i] = sphere_point(grid, i) * u[i];
    auto at = [&](int k, int j) -> Vec3 {
        j = grid.wrap_theta(j);
        if (k == 0) return X[0];
        return X[grid.ring_index(k, j)];
    };
    for (int k = 1; k <= nr; ++k) {
        for (int j = 0; j < nt; ++j) {
            const int idx = grid.ring_index(k, j);
            const Vec3 c = at(k, j);
            Vec3 Xr, Xrr, Xrt;
            const Vec3 Xt = (at(k, j + 1) - at(k, j - 1)) * (1.0 / (2.0 * ht));
            const Vec3 Xtt = (at(k, j + 1) - c * 2.0 + at(k, j - 1)) * (1.0 / (ht * ht));
            auto Xt_at = [&](int kk) -> Vec3 {
                return (at(kk, j + 1) - at(kk, j - 1)) * (1.0 / (2.0 * ht));
            };
            if (k == nr) {
                Xr = detail::one_sided_d1(c, at(k - 1, j), at(k - 2, j), h);
                Xrr = detail::one_sided_d2(c, at(k - 1, j), at(k - 2, j), at(k - 3, j), h);
                Xrt = detail::one_sided_d1(Xt, Xt_at(k - 1), Xt_at(k - 2), h);
            } else {
                Xr = (at(k + 1, j) - at(k - 1, j)) * (1.0 / (2.0 * h));
                Xrr = (at(k + 1, j) - c * 2.0 + at(k - 1, j)) * (1.0 / (h * h));
                Xrt = (Xt_at(k + 1) - Xt_at(k - 1)) * (1.0 / (2.0 * h));
            }
            out[idx] = detail::oracle_from_surface_derivs(grid, idx, sphere_point(grid, idx),
                                                          Xr, Xt, Xrr, Xrt, Xtt);
        }
    }
    return out;
}

// max over boundary nodes of |<mu_hat, nu>| with nu from one-sided embedding
// derivatives; exactly 0 for perpendicular contact.
inline double boundary_orthogonality_residual(const GraphField& f, const Grid& grid) {
    const auto oracle = embedding_oracle(f, grid);
    double worst = 0.0;
    for (int i = 0; i < grid.num_nodes(); ++i) {
        if (grid.nodes[i].cls != NodeClass::boundary) continue;
        worst = std::max(worst, std::abs(dot3(cone_normal(grid, i), oracle[i].nu)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

// Plain-text snapshot: one row per node, "r theta u K".
inline void write_snapshot(std::ostream& os, const GraphField& f, const Grid& grid) {
    const auto K = gauss_curvature_log(f, grid);
    os << "# r theta u K\n";
    for (int i = 0; i < grid.num_nodes(); ++i)
        os << grid.nodes[i].r << ' ' << grid.nodes[i].theta << ' '
           << std::exp(f.phi[i]) << ' ' << K[i] << '\n';
}

// Wavefront-style text mesh of the embedded surface (n=2). Axisymmetric
// profiles are revolved with `segments` angular samples.
inline void write_mesh(std::ostream& os, const GraphField& f, const Grid& grid, int segments = 64) {
    if (grid.spec.n != 2) throw std::invalid_argument("write_mesh: n=2 only");
    auto emit_vertex = [&](const Vec3& p) { os << "v " << p[0] << ' ' << p[1] << ' ' << p[2] << '\n'; };
    if (grid.is_full2d()) {
        const int nr = grid.spec.nr, nt = grid.spec.ntheta;
        for (int i = 0; i < grid.num_nodes(); ++i)
            emit_vertex(sphere_point(grid, i) * std::exp(f.phi[i]));
        auto vid = [&](int k, int j) { return grid.ring_index(k, grid.wrap_theta(j)) + 1; };
        for (int j = 0; j < nt; ++j)
            os << "f 1 " << vid(1, j) << ' ' << vid(1, j + 1) << '\n';
        for (int k = 1; k < nr; ++k)
            for (int j = 0; j < nt; ++j) {
                os << "f " << vid(k, j) << ' ' << vid(k + 1, j) << ' ' << vid(k + 1, j + 1) << '\n';
                os << "f " << vid(k, j) << ' ' << vid(k + 1, j + 1) << ' ' << vid(k, j + 1) << '\n';
            }
        return;
    }
    const int nr = grid.spec.nr;
    const double dth = 2.0 * std::numbers::pi / segments;
    // pole vertex + revolved rings for i = 1..nr-1
    emit_vertex({0.0, 0.0, std::exp(f.phi[0])});
    for (int i = 1; i < nr; ++i) {
        const double r = grid.nodes[i].r, u = std::exp(f.phi[i]);
        for (int j = 0; j < segments; ++j)
            emit_vertex({u * std::sin(r) * std::cos(j * dth), u * std::sin(r) * std::sin(j * dth),
                         u * std::cos(r)});
    }
    auto vid = [&](int i, int j) { return 2 + (i - 1) * segments + ((j % segments + segments) % segments); };
    for (int j = 0; j < segments; ++j)
        os << "f 1 " << vid(1, j) << ' ' << vid(1, j + 1) << '\n';
    for (int i = 1; i < nr - 1; ++i)
        for (int j = 0; j < segments; ++j) {
            os << "f " << vid(i, j) << ' ' << vid(i + 1, j) << ' ' << vid(i + 1, j + 1) << '\n';
            os << "f " << vid(i, j) << ' ' << vid(i + 1, j + 1) << ' ' << vid(i, j + 1) << '\n';
        }
}

} // namespace gcflow
