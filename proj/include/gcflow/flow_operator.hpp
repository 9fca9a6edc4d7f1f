#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gcflow/errors.hpp"
#include "gcflow/small_tensor.hpp"
#include "gcflow/sphere_grid.hpp"

namespace gcflow {

// The fully nonlinear speed
//   Q = e^{(alpha-1) phi} (1 + |D phi|^2)^{beta/n} det(w)^{-alpha/n},
//   w_ij = sigma_ij - phi_ij + phi_i phi_j  (frame components, sigma = I),
// its admissibility certificate and its linearization.

inline double beta(double alpha, int n) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("beta: alpha must lie in (0,1)");
    return 0.5 * (alpha + 1.0) * n + alpha;
}

struct WField {
    std::vector<FrameSym> w;
    std::vector<FrameSym> w_inv;
    std::vector<double> det_w;
    std::vector<double> min_eig;

    double global_min_eig() const {
        double m = min_eig.empty() ? 0.0 : min_eig[0];
        for (double e : min_eig) m = std::min(m, e);
        return m;
    }
};

inline FrameSym w_point(const FrameVec& G, const FrameSym& H, int n) {
    return FrameSym::identity(n) - H + FrameSym::outer(G, n);
}

inline WField compute_w(const DerivativeSet& d, int n) {
    WField wf;
    const int N = static_cast<int>(d.grad.size());
    wf.w.resize(N);
    wf.w_inv.resize(N);
    wf.det_w.resize(N);
    wf.min_eig.resize(N);
    for (int i = 0; i < N; ++i) {
        wf.w[i] = w_point(d.grad[i], d.hess[i], n);
        wf.det_w[i] = wf.w[i].det(n);
        if (std::abs(wf.det_w[i]) < 1e-14)
            throw SingularWError("compute_w: |det w| < 1e-14 at node " + std::to_string(i));
        wf.w_inv[i] = wf.w[i].inverse(n);
        wf.min_eig[i] = wf.w[i].min_eig(n);
    }
    return wf;
}

inline WField compute_w(const GraphField& f, const Grid& grid) {
    return compute_w(compute_derivatives(f, grid), grid.spec.n);
}

// Pointwise speed from (phi, D phi, D^2 phi); the grid-level evaluate_Q and
// the finite-difference linearization oracle both go through here.
inline double q_point(double phi, const FrameVec& G, const FrameSym& H, int n, double alpha) {
    const double dw = w_point(G, H, n).det(n);
    if (dw <= 0.0) throw NonAdmissibleError("q_point: det(w) <= 0");
    return std::exp((alpha - 1.0) * phi) * std::pow(1.0 + G.norm2(n), beta(alpha, n) / n) *
           std::pow(dw, -alpha / n);
}

struct SpeedField {
    std::vector<double> Q;
    double beta = 0.0;
};

inline SpeedField evaluate_Q(const GraphField& f, const WField& wf, const Grid& grid,
                             double alpha, const DerivativeSet& d) {
    const int n = grid.spec.n;
    SpeedField s;
    s.beta = beta(alpha, n);
    s.Q.resize(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        if (wf.min_eig[i] <= 0.0)
            throw NonAdmissibleError("evaluate_Q: w not positive definite at node " +
                                     std::to_string(i));
        s.Q[i] = std::exp((alpha - 1.0) * f.phi[i]) *
                 std::pow(1.0 + d.grad[i].norm2(n), s.beta / n) *
                 std::pow(wf.det_w[i], -alpha / n);
    }
    return s;
}

inline SpeedField evaluate_Q(const GraphField& f, const WField& wf, const Grid& grid,
                             double alpha) {
    return evaluate_Q(f, wf, grid, alpha, compute_derivatives(f, grid));
}

// Linearization:
//   Q^{ij} = (alpha/n) Q w^{ij}
//   Q^k    = (2Q/n) (beta/(1+|D phi|^2) sigma^{kl} - alpha w^{kl}) phi_l
struct LinearizationData {
    std::vector<FrameSym> Qij;
    std::vector<FrameVec> Qk;
};

inline void linearize_point(double Q, const FrameVec& G, const FrameSym& w_inv, int n,
                            double alpha, FrameSym& Qij, FrameVec& Qk) {
    Qij = w_inv * (alpha / n * Q);
    const double b = beta(alpha, n);
    const double gfac = b / (1.0 + G.norm2(n));
    const FrameVec wG = w_inv.apply(G, n);
    Qk = {(2.0 * Q / n) * (gfac * G.r - alpha * wG.r),
          (2.0 * Q / n) * (gfac * G.t - alpha * wG.t)};
}

inline LinearizationData linearize_Q(const GraphField& f, const WField& wf, const Grid& grid,
                                     double alpha, const DerivativeSet& d, const SpeedField& s) {
    const int n = grid.spec.n;
    LinearizationData lin;
    lin.Qij.resize(grid.num_nodes());
    lin.Qk.resize(grid.num_nodes());
    for (int i = 0; i < grid.num_nodes(); ++i) {
        if (wf.min_eig[i] <= 0.0)
            throw NonAdmissibleError("linearize_Q: w not positive definite at node " +
                                     std::to_string(i));
        linearize_point(s.Q[i], d.grad[i], wf.w_inv[i], n, alpha, lin.Qij[i], lin.Qk[i]);
    }
    return lin;
}

inline LinearizationData linearize_Q(const GraphField& f, const WField& wf, const Grid& grid,
                                     double alpha) {
    const auto d = compute_derivatives(f, grid);
    const auto s = evaluate_Q(f, wf, grid, alpha, d);
    return linearize_Q(f, wf, grid, alpha, d, s);
}

// ---------------------------------------------------------------------------
// Sphere commutator identities (closed-form residual checks)
// ---------------------------------------------------------------------------
//
// For restrictions phi = c0 + <a, x> on S^2 every covariant derivative has a
// closed form (D^2 phi = -<a,x> sigma, phi_{ijk} = -phi_k sigma_ij, ...), so
// the identities can be evaluated as pure algebra at sampled points with no
// discretization error. Direction "1" is the first vector of a random
// orthonormal tangent frame at the sampled point.

enum class IdentityMutation {
    none,
    drop_curvature_term,   // drops 2(tr w^{kl} - n + w^{kl} phi_k phi_l) from the first identity
    drop_w111_term,        // drops -2 w_{11;1} phi_1 from the second identity
};

struct IdentityResiduals {
    double eq1 = 0.0;
    double eq2 = 0.0;
};

inline IdentityResiduals verify_commutator_identities(int num_points, const Vec3& a, double c0,
                                                      std::uint64_t seed,
                                                      IdentityMutation mut = IdentityMutation::none) {
    constexpr int n = 2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    IdentityResiduals res;

    for (int sample = 0; sample < num_points; ++sample) {
        Vec3 p{gauss(rng), gauss(rng), gauss(rng)};
        p = p * (1.0 / norm3(p));
        Vec3 t{gauss(rng), gauss(rng), gauss(rng)};
        t = t - p * dot3(t, p);
        const Vec3 e1 = t * (1.0 / norm3(t));
        const Vec3 e2 = cross3(p, e1);

        const double psi = dot3(a, p);
        const double A[2] = {dot3(a, e1), dot3(a, e2)};
        const double I[2][2] = {{1.0, 0.0}, {0.0, 1.0}};

        const FrameSym w{1.0 + psi + A[0] * A[0], A[0] * A[1], 1.0 + psi + A[1] * A[1]};
        if (w.min_eig(n) <= 0.0)
            throw NonAdmissibleError("verify_commutator_identities: inadmissible test field");
        const FrameSym winv = w.inverse(n);
        const double wi[2][2] = {{winv.rr, winv.rt}, {winv.rt, winv.tt}};
        const double trwinv = winv.trace(n);

        // closed-form covariant derivatives of w
        auto w1 = [&](int i, int j, int k) {
            return A[k] * I[i][j] - psi * I[i][k] * A[j] - psi * A[i] * I[j][k];
        };
        auto w2 = [&](int i, int j, int k, int l) {
            return -psi * I[k][l] * I[i][j] - A[l] * I[i][k] * A[j] +
                   psi * psi * (I[i][k] * I[j][l] + I[i][l] * I[j][k]) - A[i] * A[l] * I[j][k];
        };

        double winv_AA = 0.0, lhs1 = 0.0, t3 = 0.0, lhs2 = 0.0, rhs2a = 0.0;
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) {
                winv_AA += wi[k][l] * A[k] * A[l];
                lhs1 += wi[k][l] * (w2(0, 0, k, l) - w2(k, l, 0, 0));
                // 2 w^{kl}(phi_{1kl} phi_1 - phi_{k11} phi_l), derivation-consistent sign
                t3 += 2.0 * wi[k][l] * ((-A[l] * I[0][k]) * A[0] - (-A[0] * I[k][0]) * A[l]);
                lhs2 += wi[k][l] * (w1(0, 0, k) * w1(0, 0, l) - w1(0, k, 0) * w1(0, l, 0));
                rhs2a += wi[k][l] * w1(0, 0, k) * A[l];
            }

        const double phi11 = -psi;
        double curv = 2.0 * (trwinv - n + winv_AA);
        if (mut == IdentityMutation::drop_curvature_term) curv = 0.0;
        const double rhs1 = -2.0 * trwinv * phi11 + curv + t3;
        res.eq1 = std::max(res.eq1, std::abs(lhs1 - rhs1));

        const double w11 = w.rr;
        double rhs2 = 2.0 * rhs2a * w11 - 2.0 * w1(0, 0, 0) * A[0] - w11 * w11 * winv_AA +
                      w11 * A[0] * A[0];
        if (mut == IdentityMutation::drop_w111_term) rhs2 += 2.0 * w1(0, 0, 0) * A[0];
        res.eq2 = std::max(res.eq2, std::abs(lhs2 - rhs2));
    }
    return res;
}

} // namespace gcflow
