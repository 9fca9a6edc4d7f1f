#pragma once

#include <array>
#include <cmath>

namespace gcflow {

// Per-node tensors are stored in orthonormal-frame components
// (e_r, e_theta/sin r), so the round metric is the identity and all
// determinants/eigenvalues are sigma-relative by construction.
//
// For n=1 only the .r / .rr slots are meaningful; every operation takes
// the dimension explicitly and ignores the rest.

struct FrameVec {
    double r = 0.0;
    double t = 0.0;

    double norm2(int n) const { return n == 1 ? r * r : r * r + t * t; }
};

struct FrameSym {
    double rr = 0.0;
    double rt = 0.0;
    double tt = 0.0;

    static FrameSym identity(int n) { return {1.0, 0.0, n == 1 ? 0.0 : 1.0}; }

    static FrameSym outer(const FrameVec& v, int n) {
        if (n == 1) return {v.r * v.r, 0.0, 0.0};
        return {v.r * v.r, v.r * v.t, v.t * v.t};
    }

    FrameSym operator+(const FrameSym& o) const { return {rr + o.rr, rt + o.rt, tt + o.tt}; }
    FrameSym operator-(const FrameSym& o) const { return {rr - o.rr, rt - o.rt, tt - o.tt}; }
    FrameSym operator*(double s) const { return {rr * s, rt * s, tt * s}; }

    double det(int n) const { return n == 1 ? rr : rr * tt - rt * rt; }
    double trace(int n) const { return n == 1 ? rr : rr + tt; }

    FrameSym inverse(int n) const {
        if (n == 1) return {1.0 / rr, 0.0, 0.0};
        const double d = det(2);
        return {tt / d, -rt / d, rr / d};
    }

    // Smallest eigenvalue (frame components make this sigma-relative).
    double min_eig(int n) const {
        if (n == 1) return rr;
        const double mean = 0.5 * (rr + tt);
        const double disc = std::sqrt(0.25 * (rr - tt) * (rr - tt) + rt * rt);
        return mean - disc;
    }

    FrameVec apply(const FrameVec& v, int n) const {
        if (n == 1) return {rr * v.r, 0.0};
        return {rr * v.r + rt * v.t, rt * v.r + tt * v.t};
    }

    // v^T S v
    double quad(const FrameVec& v, int n) const {
        if (n == 1) return rr * v.r * v.r;
        return rr * v.r * v.r + 2.0 * rt * v.r * v.t + tt * v.t * v.t;
    }

    double frobenius_contract(const FrameSym& o, int n) const {
        if (n == 1) return rr * o.rr;
        return rr * o.rr + 2.0 * rt * o.rt + tt * o.tt;
    }
};

inline double dot(const FrameVec& a, const FrameVec& b, int n) {
    return n == 1 ? a.r * b.r : a.r * b.r + a.t * b.t;
}

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

} // namespace gcflow
